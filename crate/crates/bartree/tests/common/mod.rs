//! Minimal canned HTTP/1.1 server for loopback tests.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::thread;
use std::time::Duration;

#[allow(dead_code)] // each test binary uses its own subset
pub enum Canned {
    Ok(String),
    NotFound,
    Redirect(String),
    Slow(String, Duration),
}

/// Serves the canned responses in order on a fresh loopback port and
/// returns the base URL plus a handle yielding the raw request heads.
pub fn serve(responses: Vec<Canned>) -> (String, thread::JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind loopback");
    let base = format!("http://{}", listener.local_addr().unwrap());
    let handle = thread::spawn(move || {
        let mut heads = Vec::new();
        for canned in responses {
            let (mut sock, _) = listener.accept().expect("accept");
            let mut head = String::new();
            let mut reader = BufReader::new(sock.try_clone().expect("clone socket"));
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
                head.push_str(&line);
            }
            heads.push(head);
            let response = match canned {
                Canned::Ok(body) => format!(
                    "HTTP/1.1 200 OK\r\nContent-Type: text/html\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                    body.len(),
                    body
                ),
                Canned::NotFound => String::from(
                    "HTTP/1.1 404 Not Found\r\nContent-Length: 0\r\nConnection: close\r\n\r\n",
                ),
                Canned::Redirect(to) => format!(
                    "HTTP/1.1 302 Found\r\nLocation: {to}\r\nContent-Length: 0\r\nConnection: close\r\n\r\n"
                ),
                Canned::Slow(body, delay) => {
                    thread::sleep(delay);
                    format!(
                        "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                        body.len(),
                        body
                    )
                }
            };
            // the client may have hung up already (timeout tests)
            let _ = sock.write_all(response.as_bytes());
        }
        heads
    });
    (base, handle)
}
