//! Live session server over WebSocket.
//!
//! Each connection owns at most one session, stepped only by that
//! connection's inbound messages. Protocol handling lives in the
//! synchronous [`ConnectionHandler`]; the async layer only moves text.

use std::collections::VecDeque;
use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use futures_util::{SinkExt, StreamExt};
use thiserror::Error;
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::Notify;
use tokio::task::JoinSet;
use tokio_tungstenite::tungstenite::Message;

use crate::config::AppConfig;
use crate::ik::ArmChain;
use crate::model::SkeletonFrame;
use crate::persistence::{new_session_id, now_us, Store, StoreError};
use crate::protocol::{
    decode_client, encode, pointer_to_frame, ClientMessage, CmdPayload, CmdResult, Command,
    ErrorCode, ServerMessage, SessionCommand, StateSnapshot, POINTER_PERIOD_US,
};
use crate::session::Session;

pub const DEFAULT_BIND: &str = "127.0.0.1:8737";

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("cannot bind {addr}: {source}")]
    BindFailure {
        addr: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// State shared by every connection of one server.
#[derive(Debug)]
pub struct ServiceContext {
    pub defaults: AppConfig,
    store: Mutex<Store>,
}

impl ServiceContext {
    pub fn new(defaults: AppConfig, store: Store) -> Self {
        Self {
            defaults,
            store: Mutex::new(store),
        }
    }

    fn with_store<T>(&self, f: impl FnOnce(&Store) -> T) -> T {
        let guard = self.store.lock().unwrap_or_else(|p| p.into_inner());
        f(&guard)
    }
}

struct LiveSession {
    session: Session,
    avatar: ArmChain,
}

/// Protocol state machine for a single client connection.
pub struct ConnectionHandler {
    ctx: Arc<ServiceContext>,
    live: Option<LiveSession>,
}

impl ConnectionHandler {
    pub fn new(ctx: Arc<ServiceContext>) -> Self {
        Self { ctx, live: None }
    }

    pub fn has_session(&self) -> bool {
        self.live.is_some()
    }

    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMessage> {
        match decode_client(text) {
            Ok(msg) => self.handle(msg),
            Err(e) => vec![ServerMessage::error(
                ErrorCode::MalformedMessage,
                e.to_string(),
            )],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        match msg {
            ClientMessage::Frame(frame) => self.step(frame),
            ClientMessage::PointerInput(input) => match &self.live {
                None => vec![no_session()],
                Some(live) => {
                    let ts = live
                        .session
                        .last_timestamp()
                        .map_or(0, |t| t + POINTER_PERIOD_US);
                    let frame = pointer_to_frame(&input, &live.session.config().scene, ts);
                    self.step(frame)
                }
            },
            ClientMessage::SessionCmd(cmd) => self.command(cmd),
        }
    }

    fn step(&mut self, frame: SkeletonFrame) -> Vec<ServerMessage> {
        let Some(live) = self.live.as_mut() else {
            return vec![no_session()];
        };
        let shoulder_source = frame.clone();
        match live.session.push_frame(frame) {
            Err(rejection) => vec![ServerMessage::error(
                ErrorCode::InvalidFrame,
                rejection.to_string(),
            )],
            Ok(events) => {
                let mut out: Vec<ServerMessage> = events
                    .iter()
                    .map(|&event| ServerMessage::Event { event })
                    .collect();
                out.push(ServerMessage::State(StateSnapshot::capture(
                    live.session.state(),
                    &live.avatar,
                    Some(&shoulder_source),
                )));
                out
            }
        }
    }

    fn command(&mut self, cmd: SessionCommand) -> Vec<ServerMessage> {
        let reply = |r: CmdResult| vec![ServerMessage::CmdResult(r)];
        match cmd.cmd {
            Command::Start => {
                if self.live.is_some() {
                    return reply(CmdResult::err(
                        Command::Start,
                        "a session is already active; stop it first",
                    ));
                }
                let app = match &cmd.config {
                    Some(overrides) => match self.ctx.defaults.with_overrides(overrides) {
                        Ok(c) => c,
                        Err(e) => return reply(CmdResult::err(Command::Start, e.to_string())),
                    },
                    None => self.ctx.defaults.clone(),
                };
                let session = match Session::new(app.game()) {
                    Ok(s) => s,
                    Err(e) => return reply(CmdResult::err(Command::Start, e.to_string())),
                };
                let config = session.config().clone();
                let state = StateSnapshot::capture(session.state(), &app.avatar, None);
                self.live = Some(LiveSession {
                    session,
                    avatar: app.avatar,
                });
                vec![
                    ServerMessage::CmdResult(CmdResult::ok(
                        Command::Start,
                        CmdPayload::Started { config },
                    )),
                    ServerMessage::State(state),
                ]
            }
            Command::Stop => {
                let Some(live) = self.live.take() else {
                    return reply(CmdResult::err(Command::Stop, "no active session"));
                };
                let created = now_us();
                let record = live.session.into_record(new_session_id(created), created);
                let metrics = record.metrics;
                match self.ctx.with_store(|s| s.save(&record)) {
                    Ok(session_id) => reply(CmdResult::ok(
                        Command::Stop,
                        CmdPayload::Stopped {
                            session_id,
                            metrics,
                        },
                    )),
                    Err(e) => {
                        log::error!("failed to persist session: {e}");
                        reply(CmdResult::err(Command::Stop, e.to_string()))
                    }
                }
            }
            Command::List => match self.ctx.with_store(Store::list) {
                Ok(sessions) => reply(CmdResult::ok(
                    Command::List,
                    CmdPayload::Sessions { sessions },
                )),
                Err(e) => reply(CmdResult::err(Command::List, e.to_string())),
            },
            Command::Load | Command::Delete => {
                let Some(id) = cmd.id else {
                    return reply(CmdResult::err(cmd.cmd, "missing session id"));
                };
                let result = if cmd.cmd == Command::Load {
                    self.ctx
                        .with_store(|s| s.load(&id))
                        .map(|r| CmdPayload::Loaded {
                            record: Box::new(r),
                        })
                } else {
                    self.ctx
                        .with_store(|s| s.delete(&id))
                        .map(|()| CmdPayload::Deleted { session_id: id })
                };
                match result {
                    Ok(p) => reply(CmdResult::ok(cmd.cmd, p)),
                    Err(e) => reply(CmdResult::err(cmd.cmd, e.to_string())),
                }
            }
        }
    }
}

fn no_session() -> ServerMessage {
    ServerMessage::error(ErrorCode::NoActiveSession, "send session_cmd start first")
}

/// Outbound queue for one connection. Events and replies are never
/// dropped; a newer `state` replaces any older one still waiting to be sent.
#[derive(Debug, Default)]
pub struct Outbox {
    queue: Mutex<VecDeque<ServerMessage>>,
    notify: Notify,
    closed: AtomicBool,
}

impl Outbox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&self, msg: ServerMessage) {
        let mut q = self.queue.lock().unwrap_or_else(|p| p.into_inner());
        if matches!(msg, ServerMessage::State(_)) {
            q.retain(|m| !matches!(m, ServerMessage::State(_)));
        }
        q.push_back(msg);
        drop(q);
        self.notify.notify_one();
    }

    pub fn drain(&self) -> Vec<ServerMessage> {
        let mut q = self.queue.lock().unwrap_or_else(|p| p.into_inner());
        q.drain(..).collect()
    }

    pub fn close(&self) {
        self.closed.store(true, Ordering::SeqCst);
        self.notify.notify_one();
    }

    fn is_closed(&self) -> bool {
        self.closed.load(Ordering::SeqCst)
    }
}

pub struct ServerOptions {
    pub bind: String,
    pub store_root: PathBuf,
    pub defaults: AppConfig,
}

pub struct Server {
    listener: TcpListener,
    ctx: Arc<ServiceContext>,
}

impl Server {
    pub async fn bind(opts: ServerOptions) -> Result<Self, ServiceError> {
        let store = Store::open(&opts.store_root)?;
        let listener =
            TcpListener::bind(&opts.bind)
                .await
                .map_err(|source| ServiceError::BindFailure {
                    addr: opts.bind.clone(),
                    source,
                })?;
        Ok(Self {
            listener,
            ctx: Arc::new(ServiceContext::new(opts.defaults, store)),
        })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections until `shutdown` resolves.
    pub async fn run_until(self, shutdown: impl Future<Output = ()>) -> Result<(), ServiceError> {
        let mut connections = JoinSet::new();
        tokio::pin!(shutdown);
        loop {
            tokio::select! {
                _ = &mut shutdown => break,
                accepted = self.listener.accept() => {
                    let (stream, peer) = accepted?;
                    log::info!("client connected: {peer}");
                    connections.spawn(handle_connection(stream, self.ctx.clone()));
                }
                Some(_) = connections.join_next(), if !connections.is_empty() => {}
            }
        }
        connections.shutdown().await;
        Ok(())
    }
}

async fn handle_connection(stream: TcpStream, ctx: Arc<ServiceContext>) {
    let ws = match tokio_tungstenite::accept_async(stream).await {
        Ok(ws) => ws,
        Err(e) => {
            log::warn!("websocket handshake failed: {e}");
            return;
        }
    };
    let (mut sink, mut source) = ws.split();
    let outbox = Arc::new(Outbox::new());

    let writer_box = outbox.clone();
    let writer = tokio::spawn(async move {
        loop {
            let notified = writer_box.notify.notified();
            let batch = writer_box.drain();
            if batch.is_empty() {
                if writer_box.is_closed() {
                    break;
                }
                notified.await;
                continue;
            }
            for msg in batch {
                if sink.send(Message::Text(encode(&msg))).await.is_err() {
                    return;
                }
            }
        }
        let _ = sink.close().await;
    });

    let multi_thread = tokio::runtime::Handle::current().runtime_flavor()
        == tokio::runtime::RuntimeFlavor::MultiThread;
    let mut handler = ConnectionHandler::new(ctx);
    while let Some(msg) = source.next().await {
        let replies = match msg {
            Ok(Message::Text(text)) => match decode_client(&text) {
                // session commands touch the filesystem
                Ok(cmd @ ClientMessage::SessionCmd(_)) if multi_thread => {
                    tokio::task::block_in_place(|| handler.handle(cmd))
                }
                Ok(msg) => handler.handle(msg),
                Err(e) => vec![ServerMessage::error(
                    ErrorCode::MalformedMessage,
                    e.to_string(),
                )],
            },
            Ok(Message::Binary(_)) => vec![ServerMessage::error(
                ErrorCode::MalformedMessage,
                "binary messages are not supported",
            )],
            Ok(Message::Close(_)) | Err(_) => break,
            Ok(_) => continue,
        };
        for r in replies {
            outbox.push(r);
        }
    }
    outbox.close();
    let _ = writer.await;
}

/// Runs the server on a fresh runtime until Ctrl-C.
pub fn serve(opts: ServerOptions) -> Result<(), ServiceError> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    rt.block_on(async {
        let server = Server::bind(opts).await?;
        log::info!("listening on ws://{}", server.local_addr()?);
        server
            .run_until(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })
}
