//! Serves one control room on an ephemeral port and drives a full isolation
//! over plain HTTP: plan, put the plate order in effect, step every order,
//! release, restore, then read the event stream with a long-poll.
//!
//! Run with `cargo run -p traction-service --example http_session`.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::sync::Arc;

use traction_isolation::state::SwitchingState;
use traction_isolation::topology::load_topology;
use traction_service::Service;

const NET: &str = include_str!("../../../fixtures/minimal/minimal.net");
const REQ: &str = include_str!("../../../fixtures/minimal/minimal.req");

/// One HTTP/1.1 exchange; returns the status code and body.
fn call(addr: SocketAddr, method: &str, path: &str, headers: &[(&str, &str)], body: &str) -> std::io::Result<(u16, String)> {
    let mut stream = TcpStream::connect(addr)?;
    let mut req = format!("{method} {path} HTTP/1.1\r\nhost: {addr}\r\nconnection: close\r\ncontent-length: {}\r\n", body.len());
    for (k, v) in headers {
        req.push_str(&format!("{k}: {v}\r\n"));
    }
    req.push_str("\r\n");
    req.push_str(body);
    stream.write_all(req.as_bytes())?;
    let mut reply = String::new();
    stream.read_to_string(&mut reply)?;
    let status = reply.split_whitespace().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let body = reply.split_once("\r\n\r\n").map_or("", |(_, b)| b).to_owned();
    Ok((status, body))
}

fn field<'a>(body: &'a str, key: &str) -> &'a str {
    body.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix(": ")).unwrap_or("")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let topo = Arc::new(load_topology(NET)?);
    let service = Service::with_rooms(topo.clone(), &SwitchingState::normal(&topo), 1)?;
    let runtime = tokio::runtime::Runtime::new()?;
    let listener = runtime.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let addr = listener.local_addr()?;
    runtime.spawn(traction_service::serve(listener, service));

    let (status, plan) = call(addr, "POST", "/isolations", &[], REQ)?;
    println!("POST /isolations -> {status}\n{plan}");
    let session = field(&plan, "pops").to_owned();
    for (event, role) in [("request", "director"), ("acknowledge", "dispatcher"), ("put_in_effect", "dispatcher")] {
        let (status, body) = call(addr, "POST", &format!("/pops/{session}/{event}"), &[("x-role", role)], "")?;
        println!("POST /pops/{session}/{event} -> {status} {}", field(&body, "to"));
    }
    // Step each isolation order until it completes; the room rejects any
    // step taken out of global sequence, so retry the orders round-robin.
    let drive = |orders: &str| -> std::io::Result<()> {
        let mut open: Vec<&str> = orders.split(',').collect();
        while !open.is_empty() {
            let mut progressed = false;
            for id in open.clone() {
                let (status, body) = call(addr, "POST", &format!("/orders/{id}/step"), &[], "")?;
                if status == 200 {
                    progressed = true;
                    println!("  {id} op {} {} {} -> {}", field(&body, "op"), field(&body, "kind"), field(&body, "target"), field(&body, "result"));
                    if field(&body, "order_complete") == "true" {
                        open.retain(|o| *o != id);
                    }
                }
            }
            if !progressed {
                eprintln!("no order can step: {open:?}");
                break;
            }
        }
        Ok(())
    };
    println!("isolation:");
    drive(field(&plan, "orders"))?;
    let (_, state) = call(addr, "GET", "/state", &[], "")?;
    println!("grounded after isolation: {}", field(&state, "grounded"));
    call(addr, "POST", &format!("/pops/{session}/request_release"), &[("x-role", "director")], "")?;
    println!("restoration:");
    drive(field(&plan, "restore_orders"))?;
    call(addr, "POST", &format!("/pops/{session}/release"), &[("x-role", "dispatcher")], "")?;

    let (_, events) = call(addr, "GET", "/events?since=0", &[], "")?;
    let last = events.lines().count();
    println!("{last} events logged; last: {}", events.lines().last().unwrap_or(""));
    // Nothing new arrives, so this long-poll returns empty after the wait.
    let (status, tail) = call(addr, "GET", &format!("/events?since={last}&wait_ms=200"), &[], "")?;
    println!("GET /events?since={last}&wait_ms=200 -> {status}, {} new", tail.lines().count());
    Ok(())
}
