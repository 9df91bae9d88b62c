//! Live play over HTTP and websockets.
//!
//! A session pairs a person with the planner (with or without chat) or with
//! a second person. Each session keeps one numbered event stream; every
//! event is rendered per recipient so a client only ever sees its own walls,
//! and the treasure only when it is visible on its side.
//!
//! | route | |
//! |---|---|
//! | `GET /health` | liveness |
//! | `POST /sessions` | create, returns the creator's client token |
//! | `POST /sessions/{id}/join` | second seat of a person-vs-person game |
//! | `GET /sessions/{id}/state?client=` | current view |
//! | `POST /sessions/{id}/move` | `{client, direction}` |
//! | `POST /sessions/{id}/chat` | `{client, text}` |
//! | `GET /sessions/{id}/events?client=&since=` | websocket event stream |
//!
//! JSON schemas for all payloads live in `schemas/`.

pub mod app;
pub mod config;
pub mod persist;
pub mod session;
pub mod wire;

pub use app::{router, serve, AppState};
pub use config::ServerConfig;
pub use session::{ProtocolError, SessionCore, SessionRecord};
pub use wire::{SessionCondition, WireEvent, WIRE_VERSION};
