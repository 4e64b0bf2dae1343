//! HTTP front end: the interface document, a static page, and an exec
//! endpoint.
//!
//! - `GET /` serves `index.html` (from `static_dir` if given, else a built-in
//!   page).
//! - `GET /spec.json` serves the document.
//! - `POST /exec` takes SQL text. The query must parse; the response header
//!   `X-In-Closure` reports whether the interface can express it. With an
//!   adapter command, the SQL is piped to `sh -c CMD` and its stdout is
//!   returned. Otherwise the body is echoed as a one-column TSV (`sql`
//!   header, one row).

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::Arc;
use std::thread::JoinHandle;

use log::{info, warn};
use tiny_http::{Header, Method, Request, Response, Server};

use crate::evaluator::closure::{in_closure, DEFAULT_SEARCH_BUDGET};
use crate::grammar::GrammarAnnotations;
use crate::mapper::InterfaceModel;
use crate::parser::parse;
use crate::spec_io::export_json;

const INDEX: &str = include_str!("../assets/index.html");

#[derive(Debug, Clone, Default)]
pub struct ServeOptions {
    pub exec_adapter: Option<String>,
    pub static_dir: Option<PathBuf>,
}

struct App {
    spec: String,
    model: InterfaceModel,
    ann: GrammarAnnotations,
    opts: ServeOptions,
}

pub struct Handle {
    pub addr: SocketAddr,
    server: Arc<Server>,
    thread: Option<JoinHandle<()>>,
}

impl Handle {
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Block until the server stops.
    pub fn join(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }

    pub fn stop(mut self) {
        self.server.unblock();
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Bind `addr` (port 0 picks a free port) and serve on a background thread.
pub fn start(addr: &str, model: InterfaceModel, ann: GrammarAnnotations, opts: ServeOptions) -> std::io::Result<Handle> {
    let server = Arc::new(Server::http(addr).map_err(std::io::Error::other)?);
    let addr = server.server_addr().to_ip().ok_or_else(|| std::io::Error::other("not an IP listener"))?;
    let app = App { spec: export_json(&model), model, ann, opts };
    let srv = Arc::clone(&server);
    let thread = std::thread::spawn(move || {
        for req in srv.incoming_requests() {
            if let Err(e) = handle(&app, req) {
                warn!("request failed: {e}");
            }
        }
    });
    info!("serving on http://{addr}");
    Ok(Handle { addr, server, thread: Some(thread) })
}

fn header(k: &str, v: &str) -> Header {
    Header::from_bytes(k.as_bytes(), v.as_bytes()).expect("static header is valid")
}

fn text(status: u16, body: impl Into<String>, content_type: &str) -> Response<std::io::Cursor<Vec<u8>>> {
    Response::from_string(body.into()).with_status_code(status).with_header(header("Content-Type", content_type))
}

fn handle(app: &App, mut req: Request) -> std::io::Result<()> {
    let url = req.url().split('?').next().unwrap_or("/").to_string();
    let resp = match (req.method(), url.as_str()) {
        (Method::Get, "/spec.json") => text(200, app.spec.clone(), "application/json"),
        (Method::Post, "/exec") => {
            let mut body = String::new();
            req.as_reader().read_to_string(&mut body)?;
            exec(app, body.trim())
        }
        (Method::Get, path) => static_file(app, path),
        _ => text(405, "method not allowed\n", "text/plain"),
    };
    req.respond(resp)
}

fn static_file(app: &App, path: &str) -> Response<std::io::Cursor<Vec<u8>>> {
    let name = if path == "/" { "index.html" } else { path.trim_start_matches('/') };
    if let Some(dir) = &app.opts.static_dir {
        if name.split('/').any(|seg| seg == "..") {
            return text(404, "not found\n", "text/plain");
        }
        return match std::fs::read(dir.join(name)) {
            Ok(bytes) => Response::from_data(bytes).with_header(header("Content-Type", content_type(name))),
            Err(_) => text(404, "not found\n", "text/plain"),
        };
    }
    if name == "index.html" {
        text(200, INDEX, "text/html; charset=utf-8")
    } else {
        text(404, "not found\n", "text/plain")
    }
}

fn content_type(name: &str) -> &'static str {
    match name.rsplit('.').next() {
        Some("html") => "text/html; charset=utf-8",
        Some("js") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        _ => "application/octet-stream",
    }
}

fn exec(app: &App, sql: &str) -> Response<std::io::Cursor<Vec<u8>>> {
    let q = match parse(sql, &app.ann) {
        Ok(q) => q,
        Err(e) => return text(400, format!("{e}\n"), "text/plain"),
    };
    let inside = in_closure(&app.model, &q, &app.ann, DEFAULT_SEARCH_BUDGET);
    let resp = match &app.opts.exec_adapter {
        None => text(200, format!("sql\n{}\n", sql.replace(['\t', '\n'], " ")), "text/tab-separated-values"),
        Some(cmd) => match run_adapter(cmd, sql) {
            Ok(out) => text(200, out, "text/tab-separated-values"),
            Err(e) => text(502, format!("{e}\n"), "text/plain"),
        },
    };
    resp.with_header(header("X-In-Closure", if inside { "true" } else { "false" }))
}

fn run_adapter(cmd: &str, sql: &str) -> Result<String, String> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(cmd)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| format!("cannot start adapter: {e}"))?;
    if let Some(mut stdin) = child.stdin.take() {
        stdin.write_all(sql.as_bytes()).map_err(|e| e.to_string())?;
    }
    let out = child.wait_with_output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!("adapter exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr).trim()))
    }
}
