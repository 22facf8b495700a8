//! An in-process server and a small WebSocket client for protocol tests.

use std::net::SocketAddr;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use tokio::net::TcpStream;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

use tabletop_core::engine::GameEvent;
use tabletop_core::protocol::{
    decode_server, encode, ClientMessage, Command, ServerMessage, SessionCommand,
};
use tabletop_core::service::{Server, ServerOptions};
use tabletop_core::{AppConfig, SkeletonFrame};

pub struct TestServer {
    pub addr: SocketAddr,
    pub store: tempfile::TempDir,
    shutdown: Option<oneshot::Sender<()>>,
    task: Option<JoinHandle<()>>,
}

impl TestServer {
    pub async fn start(defaults: AppConfig) -> Self {
        let store = tempfile::tempdir().unwrap();
        let server = Server::bind(ServerOptions {
            bind: "127.0.0.1:0".into(),
            store_root: store.path().to_path_buf(),
            defaults,
        })
        .await
        .unwrap();
        let addr = server.local_addr().unwrap();
        let (tx, rx) = oneshot::channel::<()>();
        let task = tokio::spawn(async move {
            server
                .run_until(async {
                    let _ = rx.await;
                })
                .await
                .unwrap();
        });
        Self {
            addr,
            store,
            shutdown: Some(tx),
            task: Some(task),
        }
    }

    pub async fn stop(mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(task) = self.task.take() {
            task.await.unwrap();
        }
    }
}

pub struct Client {
    ws: WebSocketStream<MaybeTlsStream<TcpStream>>,
}

impl Client {
    pub async fn connect(addr: SocketAddr) -> Self {
        let (ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}"))
            .await
            .unwrap();
        Self { ws }
    }

    pub async fn send_text(&mut self, text: &str) {
        self.ws.send(Message::Text(text.to_string())).await.unwrap();
    }

    pub async fn send(&mut self, msg: &ClientMessage) {
        self.send_text(&encode(msg)).await;
    }

    pub async fn send_frame(&mut self, frame: &SkeletonFrame) {
        self.send(&ClientMessage::Frame(frame.clone())).await;
    }

    pub async fn command(
        &mut self,
        cmd: Command,
        id: Option<String>,
        config: Option<serde_json::Value>,
    ) {
        self.send(&ClientMessage::SessionCmd(SessionCommand {
            cmd,
            id,
            config,
        }))
        .await;
    }

    pub async fn recv(&mut self) -> ServerMessage {
        loop {
            let msg = tokio::time::timeout(Duration::from_secs(20), self.ws.next())
                .await
                .expect("timed out waiting for the server")
                .expect("connection closed")
                .unwrap();
            if let Message::Text(text) = msg {
                return decode_server(&text).unwrap();
            }
        }
    }

    /// Receives messages up to and including the next `cmd_result`.
    pub async fn until_cmd_result(&mut self) -> Vec<ServerMessage> {
        let mut out = Vec::new();
        loop {
            let m = self.recv().await;
            let done = matches!(m, ServerMessage::CmdResult(_));
            out.push(m);
            if done {
                return out;
            }
        }
    }

    /// Everything the server sent in reply to earlier messages, fenced by a
    /// `list` command.
    pub async fn sync(&mut self) -> Vec<ServerMessage> {
        self.command(Command::List, None, None).await;
        let mut out = self.until_cmd_result().await;
        out.pop();
        out
    }

    pub async fn close(mut self) {
        let _ = self.ws.close(None).await;
    }
}

pub fn events_of(msgs: &[ServerMessage]) -> Vec<GameEvent> {
    msgs.iter()
        .filter_map(|m| match m {
            ServerMessage::Event { event } => Some(*event),
            _ => None,
        })
        .collect()
}
