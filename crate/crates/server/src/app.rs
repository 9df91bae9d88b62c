//! HTTP routes and the per-session event socket.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gnomes_core::game::{generate_layout, Direction, MazeLayout, Player};
use gnomes_core::language::LanguageModule;
use serde::{Deserialize, Serialize};
use tokio::sync::watch;
use tracing::{info, warn};

use crate::config::ServerConfig;
use crate::persist::LogSink;
use crate::session::{new_token, ChatResult, MoveResult, ProtocolError, SessionCore, SessionSettings};
use crate::wire::{ClientCommand, Reply, ReplyBody, SessionCondition, StateView, WIRE_VERSION};

pub struct Session {
    core: Mutex<SessionCore>,
    seq: watch::Sender<u64>,
}

impl Session {
    fn new(core: SessionCore) -> Self {
        let (seq, _) = watch::channel(core.last_seq());
        Session {
            core: Mutex::new(core),
            seq,
        }
    }

    pub fn lock(&self) -> MutexGuard<'_, SessionCore> {
        self.core.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn publish(&self, last: u64) {
        self.seq.send_replace(last);
    }

    /// Runs `f` under the lock and publishes any new events.
    fn with<T>(&self, f: impl FnOnce(&mut SessionCore) -> T) -> T {
        let (out, last) = {
            let mut core = self.lock();
            let out = f(&mut core);
            (out, core.last_seq())
        };
        self.publish(last);
        out
    }
}

pub struct AppState {
    pub config: ServerConfig,
    pub language: Arc<LanguageModule>,
    sessions: RwLock<HashMap<String, Arc<Session>>>,
}

impl AppState {
    pub fn new(config: ServerConfig, language: LanguageModule) -> Arc<Self> {
        Arc::new(AppState {
            config,
            language: Arc::new(language),
            sessions: RwLock::new(HashMap::new()),
        })
    }

    pub fn session(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or(ApiError::NotFound)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create))
        .route("/sessions/{id}/join", post(join))
        .route("/sessions/{id}/state", get(view))
        .route("/sessions/{id}/move", post(submit_move))
        .route("/sessions/{id}/chat", post(submit_chat))
        .route("/sessions/{id}/events", get(events))
        .with_state(state)
}

#[derive(Debug)]
pub enum ApiError {
    NotFound,
    BadRequest {
        code: &'static str,
        message: String,
        line: Option<usize>,
    },
    Protocol(ProtocolError),
    Internal(String),
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::BadRequest {
            code: "bad-request",
            message: e.body_text(),
            line: None,
        }
    }
}

impl From<ProtocolError> for ApiError {
    fn from(e: ProtocolError) -> Self {
        ApiError::Protocol(e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub v: u32,
    pub error: ErrorDetail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDetail {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code, message, line) = match self {
            ApiError::NotFound => (StatusCode::NOT_FOUND, "not-found", "no such session".to_string(), None),
            ApiError::BadRequest { code, message, line } => (StatusCode::BAD_REQUEST, code, message, line),
            ApiError::Protocol(e) => {
                let status = match e {
                    ProtocolError::UnknownClient => StatusCode::UNAUTHORIZED,
                    ProtocolError::BadMessage(_) => StatusCode::BAD_REQUEST,
                    _ => StatusCode::CONFLICT,
                };
                (status, e.code(), e.to_string(), None)
            }
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", m, None),
        };
        let body = ErrorResponse {
            v: WIRE_VERSION,
            error: ErrorDetail {
                code: code.into(),
                message,
                line,
            },
        };
        (status, Json(body)).into_response()
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "v": WIRE_VERSION, "status": "ok" }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    pub condition: SessionCondition,
    /// Generate the maze from this seed.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Maze file contents; takes precedence over `seed`.
    #[serde(default)]
    pub maze: Option<String>,
    /// Planner seed; random when absent.
    #[serde(default)]
    pub agent_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeatResponse {
    pub v: u32,
    pub session_id: String,
    pub seat: Player,
    pub client: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub join_url: Option<String>,
    pub state: StateView,
}

fn layout_for(req: &CreateRequest, config: &ServerConfig) -> Result<(MazeLayout, Option<u64>), ApiError> {
    if let Some(text) = &req.maze {
        let layout = MazeLayout::from_text(text).map_err(|e| ApiError::BadRequest {
            code: "invalid-maze",
            message: e.to_string(),
            line: Some(e.line),
        })?;
        return Ok((layout, None));
    }
    let seed = req.seed.unwrap_or_else(rand::random);
    let m = config.maze;
    let layout = generate_layout(seed, m.width, m.height, m.rounds).map_err(|e| ApiError::BadRequest {
        code: "invalid-maze",
        message: e.to_string(),
        line: None,
    })?;
    Ok((layout, Some(seed)))
}

/// Creates and registers a session; shared by the route and tests.
pub fn create_session(app: &AppState, req: &CreateRequest) -> Result<SeatResponse, ApiError> {
    let (layout, maze_seed) = layout_for(req, &app.config)?;
    let id = new_token();
    let sink = match &app.config.log_dir {
        Some(dir) => Some(LogSink::create(dir, &id).map_err(|e| ApiError::Internal(e.to_string()))?),
        None => None,
    };
    let settings = SessionSettings {
        condition: req.condition,
        layout,
        maze_seed,
        planner: app.config.planner,
        agent_seed: req.agent_seed.unwrap_or_else(rand::random),
        reward: app.config.reward,
        turn_cap: app.config.turn_cap,
    };
    let (core, client) = SessionCore::new(id.clone(), settings, app.language.clone(), sink).map_err(|message| {
        ApiError::BadRequest {
            code: "invalid-maze",
            message,
            line: None,
        }
    })?;
    let state = core.view(Player::Human);
    app.sessions
        .write()
        .unwrap_or_else(|e| e.into_inner())
        .insert(id.clone(), Arc::new(Session::new(core)));
    info!(session = %id, condition = ?req.condition, "session created");
    Ok(SeatResponse {
        v: WIRE_VERSION,
        join_url: (req.condition == SessionCondition::VsHuman)
            .then(|| format!("{}/sessions/{id}/join", app.config.public_url())),
        session_id: id,
        seat: Player::Human,
        client,
        state,
    })
}

async fn create(State(app): State<Arc<AppState>>, body: Result<Json<CreateRequest>, JsonRejection>) -> Result<Response, ApiError> {
    let Json(req) = body?;
    let app2 = app.clone();
    let resp = tokio::task::spawn_blocking(move || create_session(&app2, &req))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok((StatusCode::CREATED, Json(resp)).into_response())
}

async fn join(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SeatResponse>, ApiError> {
    let session = app.session(&id)?;
    let (client, seat, state) = session.with(|core| {
        let (client, seat) = core.join()?;
        Ok::<_, ProtocolError>((client, seat, core.view(seat)))
    })?;
    Ok(Json(SeatResponse {
        v: WIRE_VERSION,
        session_id: id,
        seat,
        client,
        join_url: None,
        state,
    }))
}

#[derive(Debug, Deserialize)]
struct ClientQuery {
    client: String,
    #[serde(default)]
    since: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateResponse {
    pub v: u32,
    pub last_seq: u64,
    pub state: StateView,
}

async fn view(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<ClientQuery>,
) -> Result<Json<StateResponse>, ApiError> {
    let session = app.session(&id)?;
    let core = session.lock();
    let seat = core.seat_of(&q.client)?;
    Ok(Json(StateResponse {
        v: WIRE_VERSION,
        last_seq: core.last_seq(),
        state: core.view(seat),
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveRequest {
    pub client: String,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveResponse {
    pub v: u32,
    #[serde(flatten)]
    pub result: MoveResult,
    pub state: StateView,
}

/// Applies a person's move and, when the agent is due, schedules its turn.
pub fn apply_move(session: &Arc<Session>, seat: Player, direction: Direction) -> Result<MoveResponse, ProtocolError> {
    let (result, state, agent_due) = session.with(|core| {
        let result = core.submit_move(seat, direction)?;
        Ok::<_, ProtocolError>((result, core.view(seat), core.agent_due()))
    })?;
    if agent_due {
        spawn_agent(session.clone());
    }
    Ok(MoveResponse {
        v: WIRE_VERSION,
        result,
        state,
    })
}

/// Plays agent turns on the blocking pool; the lock is released while the
/// planner searches.
pub fn spawn_agent(session: Arc<Session>) {
    tokio::task::spawn_blocking(move || loop {
        let Some(job) = session.with(|core| core.begin_agent_turn()) else {
            break;
        };
        let result = job.run();
        session.with(|core| core.finish_agent_turn(result));
    });
}

async fn submit_move(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<MoveRequest>, JsonRejection>,
) -> Result<Json<MoveResponse>, ApiError> {
    let Json(req) = body?;
    let session = app.session(&id)?;
    let seat = session.lock().seat_of(&req.client)?;
    Ok(Json(apply_move(&session, seat, req.direction)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChatRequest {
    pub client: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub v: u32,
    pub delivered: bool,
    #[serde(flatten)]
    pub result: ChatResult,
}

async fn deliver_chat(session: Arc<Session>, seat: Player, text: String) -> Result<ChatResponse, ApiError> {
    // Parsing may call the language model over blocking HTTP.
    let result = tokio::task::spawn_blocking(move || session.with(|core| core.submit_chat(seat, &text)))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok(ChatResponse {
        v: WIRE_VERSION,
        delivered: true,
        result,
    })
}

async fn submit_chat(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<ChatRequest>, JsonRejection>,
) -> Result<Json<ChatResponse>, ApiError> {
    let Json(req) = body?;
    let session = app.session(&id)?;
    let seat = session.lock().seat_of(&req.client)?;
    Ok(Json(deliver_chat(session, seat, req.text).await?))
}

async fn events(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<ClientQuery>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let session = app.session(&id)?;
    let seat = session.lock().seat_of(&q.client)?;
    Ok(ws.on_upgrade(move |socket| async move {
        if let Err(e) = stream_events(socket, session, seat, q.since).await {
            warn!(error = %e, "event stream closed");
        }
    }))
}

fn reply(result: Result<(), ApiError>) -> Reply {
    let body = match result {
        Ok(()) => ReplyBody {
            ok: true,
            code: None,
            message: None,
        },
        Err(e) => {
            let (code, message) = match e {
                ApiError::NotFound => ("not-found".to_string(), "no such session".to_string()),
                ApiError::BadRequest { code, message, .. } => (code.to_string(), message),
                ApiError::Protocol(p) => (p.code().to_string(), p.to_string()),
                ApiError::Internal(m) => ("internal".to_string(), m),
            };
            ReplyBody {
                ok: false,
                code: Some(code),
                message: Some(message),
            }
        }
    };
    Reply { v: WIRE_VERSION, reply: body }
}

async fn stream_events(mut socket: WebSocket, session: Arc<Session>, seat: Player, since: u64) -> Result<(), axum::Error> {
    let mut rx = session.seq.subscribe();
    let mut sent = since;
    loop {
        rx.borrow_and_update();
        let batch = session.lock().events_since(seat, sent);
        for event in batch {
            sent = event.seq;
            let text = serde_json::to_string(&event).expect("wire events serialize");
            socket.send(Message::Text(text.into())).await?;
        }
        tokio::select! {
            changed = rx.changed() => {
                if changed.is_err() {
                    return Ok(());
                }
            }
            msg = socket.recv() => {
                let text = match msg {
                    None | Some(Ok(Message::Close(_))) => return Ok(()),
                    Some(Err(e)) => return Err(e),
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(_)) => continue,
                };
                let result = match serde_json::from_str::<ClientCommand>(text.as_str()) {
                    Err(e) => Err(ApiError::BadRequest { code: "bad-command", message: e.to_string(), line: None }),
                    Ok(ClientCommand::Ack { .. }) => continue,
                    Ok(ClientCommand::Move { direction }) => apply_move(&session, seat, direction).map(|_| ()).map_err(ApiError::from),
                    Ok(ClientCommand::Chat { text }) => deliver_chat(session.clone(), seat, text).await.map(|_| ()),
                };
                let text = serde_json::to_string(&reply(result)).expect("replies serialize");
                socket.send(Message::Text(text.into())).await?;
            }
        }
    }
}

/// Binds and serves until ctrl-c.
pub async fn serve(config: ServerConfig, language: LanguageModule) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(&config.bind).await?;
    info!(addr = %listener.local_addr()?, "listening");
    let app = router(AppState::new(config, language));
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
