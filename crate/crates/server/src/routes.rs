use std::path::Path;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, PathRejection};
use axum::extract::{FromRequestParts, State};
use axum::http::header::{AUTHORIZATION, CONTENT_TYPE};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use examd_core::report::{export_results_csv, SkillsTable};
use examd_core::session::{AnswerAck, ExamInfo, Feedback, FormView, Outcome, StartedExam};
use examd_core::{
    AuthToken, Credentials, Identity, LabelStyle, Question, QuestionId, Role, ScoreReport,
    SessionError, SessionId, SessionState, StoredResult, Timestamp,
};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::error::{ApiError, ErrorCode};
use crate::AppState;

type Shared = Arc<AppState>;
type ApiResult<T> = Result<T, ApiError>;

/// Any authenticated caller.
#[derive(Clone, Debug)]
pub struct Caller {
    pub identity: Identity,
    token: String,
}

/// A caller holding the administrator role.
pub struct AdminCaller(pub Identity);

/// A caller holding the candidate role.
pub struct CandidateCaller(pub Identity);

fn bearer(parts: &Parts) -> Option<&str> {
    let value = parts.headers.get(AUTHORIZATION)?.to_str().ok()?;
    let (scheme, token) = value.split_once(' ')?;
    scheme.eq_ignore_ascii_case("bearer").then(|| token.trim())
}

impl FromRequestParts<Shared> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Shared) -> ApiResult<Self> {
        let token = bearer(parts)
            .ok_or_else(|| ApiError::new(ErrorCode::Unauthorized, "missing bearer token"))?;
        let identity = state.auth.authenticate(token, state.clock.now())?;
        Ok(Caller {
            identity,
            token: token.to_owned(),
        })
    }
}

impl FromRequestParts<Shared> for AdminCaller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Shared) -> ApiResult<Self> {
        let caller = Caller::from_request_parts(parts, state).await?;
        examd_core::auth::require_admin(&caller.identity)?;
        Ok(AdminCaller(caller.identity))
    }
}

impl FromRequestParts<Shared> for CandidateCaller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Shared) -> ApiResult<Self> {
        let caller = Caller::from_request_parts(parts, state).await?;
        if caller.identity.role != Role::Candidate {
            return Err(ApiError::new(
                ErrorCode::Forbidden,
                "only candidates take exams",
            ));
        }
        Ok(CandidateCaller(caller.identity))
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    Ok(payload?.0)
}

pub fn router(state: Shared, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/time", get(time))
        .route("/login", post(login))
        .route("/logout", post(logout))
        .route("/exam/info", get(exam_info))
        .route("/exam/start", post(exam_start))
        .route("/exam/questions", get(exam_questions))
        .route("/exam/answer", post(exam_answer))
        .route("/exam/submit", post(exam_submit))
        .route("/exam/feedback", get(exam_feedback))
        .route("/admin/users", post(add_user))
        .route("/admin/users/{username}", delete(remove_user))
        .route("/admin/questions", post(add_question))
        .route("/admin/results", get(results))
        .route("/admin/results.csv", get(results_csv))
        .route("/admin/skills", get(skills))
        .fallback(api_not_found);
    let app = Router::new().nest("/api", api);
    let app = match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(|| async { (StatusCode::NOT_FOUND, "not found") }),
    };
    app.with_state(state)
}

async fn api_not_found() -> ApiError {
    ApiError::new(ErrorCode::NotFound, "no such endpoint")
}

async fn health() -> &'static str {
    "ok"
}

#[derive(Serialize, Deserialize)]
pub struct ServerTime {
    pub now: Timestamp,
}

async fn time(State(s): State<Shared>) -> Json<ServerTime> {
    Json(ServerTime { now: s.clock.now() })
}

#[derive(Deserialize)]
struct LoginRequest {
    username: String,
    password: String,
}

async fn login(
    State(s): State<Shared>,
    payload: Result<Json<LoginRequest>, JsonRejection>,
) -> ApiResult<Json<AuthToken>> {
    let req = body(payload)?;
    let store = s.store();
    let token = s
        .auth
        .login(&store, &req.username, &req.password, s.clock.now())?;
    Ok(Json(token))
}

async fn logout(State(s): State<Shared>, caller: Caller) -> StatusCode {
    s.auth.revoke(&caller.token);
    StatusCode::NO_CONTENT
}

/// The caller's session, created on first sight. A candidate with a stored
/// result has used their attempt, even across restarts.
fn session_for(s: &AppState, candidate: &str, create: bool) -> ApiResult<SessionId> {
    if let Some(id) = s.sessions.session_of(candidate) {
        return Ok(id);
    }
    if s.store()
        .list_results()
        .iter()
        .any(|r| r.username == candidate)
    {
        return Err(SessionError::DuplicateSession(candidate.to_owned()).into());
    }
    if !create {
        return Err(ApiError::new(
            ErrorCode::NoSession,
            "open the exam information page first",
        ));
    }
    let bank = s.store().list_questions(None);
    match s
        .sessions
        .create_session(candidate, &bank, s.blueprint.clone(), rand::random())
    {
        Ok(id) => Ok(id),
        // lost a race with a concurrent request from the same candidate
        Err(SessionError::DuplicateSession(_)) => s
            .sessions
            .session_of(candidate)
            .ok_or_else(|| ApiError::new(ErrorCode::Internal, "session vanished")),
        Err(e) => Err(e.into()),
    }
}

/// Finalizes the session first if its deadline has passed.
fn settle(s: &AppState, id: &SessionId) -> ApiResult<()> {
    if s.sessions.expire_if_overdue(id, s.clock.now())? {
        s.persist_finalized();
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
pub struct InfoResponse {
    #[serde(flatten)]
    pub info: ExamInfo,
    pub state: String,
    pub deadline: Option<Timestamp>,
}

async fn exam_info(
    State(s): State<Shared>,
    CandidateCaller(me): CandidateCaller,
) -> ApiResult<Json<InfoResponse>> {
    let id = session_for(&s, &me.username, true)?;
    settle(&s, &id)?;
    let current = s.sessions.snapshot(&id)?.state();
    let info = match current {
        SessionState::Registered | SessionState::InfoShown => s.sessions.present_info(&id)?,
        // reloading the page later shows the same information
        _ => ExamInfo::for_blueprint(&s.blueprint),
    };
    let state = s.sessions.snapshot(&id)?.state();
    let deadline = match state {
        SessionState::InProgress { deadline, .. } => Some(deadline),
        _ => None,
    };
    Ok(Json(InfoResponse {
        info,
        state: state.name().to_owned(),
        deadline,
    }))
}

async fn exam_start(
    State(s): State<Shared>,
    CandidateCaller(me): CandidateCaller,
) -> ApiResult<Json<StartedExam>> {
    let id = session_for(&s, &me.username, false)?;
    Ok(Json(s.sessions.start_exam(&id, s.clock.now())?))
}

async fn exam_questions(
    State(s): State<Shared>,
    CandidateCaller(me): CandidateCaller,
) -> ApiResult<Json<FormView>> {
    let id = session_for(&s, &me.username, false)?;
    settle(&s, &id)?;
    Ok(Json(s.sessions.form_view(&id)?))
}

/// Any client-side timestamp in the body is ignored.
#[derive(Deserialize)]
struct AnswerRequest {
    question_id: QuestionId,
    choice: u32,
}

async fn exam_answer(
    State(s): State<Shared>,
    CandidateCaller(me): CandidateCaller,
    payload: Result<Json<AnswerRequest>, JsonRejection>,
) -> ApiResult<Json<AnswerAck>> {
    let req = body(payload)?;
    let id = session_for(&s, &me.username, false)?;
    let ack = s
        .sessions
        .record_answer(&id, req.question_id, req.choice, s.clock.now());
    s.persist_finalized();
    Ok(Json(ack?))
}

#[derive(Serialize, Deserialize)]
pub struct SubmitResponse {
    pub outcome: Outcome,
    pub report: ScoreReport,
    /// False when the result is still queued for a retried write.
    pub persisted: bool,
}

async fn exam_submit(
    State(s): State<Shared>,
    CandidateCaller(me): CandidateCaller,
) -> ApiResult<Json<SubmitResponse>> {
    let id = session_for(&s, &me.username, false)?;
    settle(&s, &id)?;
    let done = s.sessions.submit(&id, s.clock.now())?;
    let persisted = s.persist_finalized();
    Ok(Json(SubmitResponse {
        outcome: done.outcome,
        report: done.report,
        persisted,
    }))
}

async fn exam_feedback(
    State(s): State<Shared>,
    CandidateCaller(me): CandidateCaller,
) -> ApiResult<Json<Feedback>> {
    let id = session_for(&s, &me.username, false)?;
    settle(&s, &id)?;
    Ok(Json(s.sessions.feedback(&id)?))
}

#[derive(Deserialize)]
struct NewUser {
    first_name: String,
    last_name: String,
}

async fn add_user(
    State(s): State<Shared>,
    AdminCaller(me): AdminCaller,
    payload: Result<Json<NewUser>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Credentials>)> {
    let req = body(payload)?;
    let creds =
        s.auth
            .provision_candidate(&me, &mut s.store_mut(), &req.first_name, &req.last_name)?;
    Ok((StatusCode::CREATED, Json(creds)))
}

async fn remove_user(
    State(s): State<Shared>,
    AdminCaller(_): AdminCaller,
    username: Result<axum::extract::Path<String>, PathRejection>,
) -> ApiResult<StatusCode> {
    let username = username?.0;
    s.store_mut().remove_user(&username)?;
    s.auth.revoke_user(&username);
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Serialize, Deserialize)]
pub struct QuestionCreated {
    pub id: QuestionId,
}

async fn add_question(
    State(s): State<Shared>,
    AdminCaller(_): AdminCaller,
    payload: Result<Json<Question>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<QuestionCreated>)> {
    let q = body(payload)?;
    let id = q.id.clone();
    s.store_mut().put_question(q)?;
    Ok((StatusCode::CREATED, Json(QuestionCreated { id })))
}

async fn results(State(s): State<Shared>, AdminCaller(_): AdminCaller) -> Json<Vec<StoredResult>> {
    Json(s.store().list_results().to_vec())
}

async fn results_csv(
    State(s): State<Shared>,
    AdminCaller(_): AdminCaller,
) -> ApiResult<impl IntoResponse> {
    let csv = export_results_csv(s.store().list_results())?;
    Ok(([(CONTENT_TYPE, "text/csv; charset=utf-8")], csv))
}

async fn skills(State(s): State<Shared>, AdminCaller(_): AdminCaller) -> Json<SkillsTable> {
    Json(SkillsTable::from_results(
        s.store().list_results(),
        &LabelStyle::default(),
    ))
}
