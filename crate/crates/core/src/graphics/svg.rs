//! SVG rendering: an external layout command when available, otherwise a
//! built-in layered layout.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::process::{Command, Stdio};

use super::doc::{GraphDoc, RankDir};

/// Environment variable naming the layout command, e.g. `dot -Tsvg`.
pub const LAYOUT_ENV: &str = "PADKIT_LAYOUT_CMD";
const DEFAULT_LAYOUT_CMD: &str = "dot -Tsvg";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SvgLayout {
    /// The external command from the environment or `dot`, falling back to
    /// the built-in layout when it cannot run.
    #[default]
    Auto,
    Builtin,
    /// Only this command; failures are reported.
    External(String),
}

#[derive(Debug, thiserror::Error)]
pub enum LayoutError {
    #[error("layout command is empty")]
    EmptyCommand,
    #[error("layout command `{command}` failed: {source}")]
    Spawn {
        command: String,
        source: std::io::Error,
    },
    #[error("layout command `{command}` exited with {status}: {stderr}")]
    Failed {
        command: String,
        status: std::process::ExitStatus,
        stderr: String,
    },
    #[error("layout command `{command}` produced non-UTF-8 output")]
    Encoding { command: String },
}

pub fn render_svg(doc: &GraphDoc, layout: &SvgLayout) -> Result<String, LayoutError> {
    match layout {
        SvgLayout::Builtin => Ok(builtin_svg(doc)),
        SvgLayout::External(command) => external_svg(doc, command),
        SvgLayout::Auto => {
            let command =
                std::env::var(LAYOUT_ENV).unwrap_or_else(|_| DEFAULT_LAYOUT_CMD.to_owned());
            Ok(external_svg(doc, &command).unwrap_or_else(|_| builtin_svg(doc)))
        }
    }
}

/// Pipes the DOT text through `command` and returns its standard output.
pub fn external_svg(doc: &GraphDoc, command: &str) -> Result<String, LayoutError> {
    let mut parts = command.split_whitespace();
    let program = parts.next().ok_or(LayoutError::EmptyCommand)?;
    let spawn_err = |source| LayoutError::Spawn {
        command: command.to_owned(),
        source,
    };
    let mut child = Command::new(program)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(spawn_err)?;
    let dot = doc.to_dot();
    let mut stdin = child.stdin.take().expect("stdin is piped");
    let writer = std::thread::spawn(move || stdin.write_all(dot.as_bytes()));
    let output = child.wait_with_output().map_err(spawn_err)?;
    writer
        .join()
        .expect("writer thread does not panic")
        .map_err(spawn_err)?;
    if !output.status.success() {
        return Err(LayoutError::Failed {
            command: command.to_owned(),
            status: output.status,
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_owned(),
        });
    }
    String::from_utf8(output.stdout).map_err(|_| LayoutError::Encoding {
        command: command.to_owned(),
    })
}

const NODE_W: f64 = 200.0;
const NODE_H: f64 = 36.0;
const GAP_MAJOR: f64 = 120.0;
const GAP_MINOR: f64 = 24.0;
const MARGIN: f64 = 20.0;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

/// Fixed layers with nodes evenly spaced inside each layer.
pub fn builtin_svg(doc: &GraphDoc) -> String {
    let ranks = doc.ranks.max(1);
    let mut slots: Vec<usize> = vec![0; ranks];
    let mut centers: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    let horizontal = doc.rankdir == RankDir::LR;
    for node in &doc.nodes {
        let rank = node.rank.min(ranks - 1);
        let i = slots[rank];
        slots[rank] += 1;
        let major = MARGIN + rank as f64 * (if horizontal { NODE_W } else { NODE_H } + GAP_MAJOR);
        let minor = MARGIN + i as f64 * (if horizontal { NODE_H } else { NODE_W } + GAP_MINOR);
        let (x, y) = if horizontal {
            (major, minor)
        } else {
            (minor, major)
        };
        centers.insert(&node.id, (x + NODE_W / 2.0, y + NODE_H / 2.0));
    }
    let depth = slots.iter().copied().max().unwrap_or(0).max(1) as f64;
    let (extent_major, extent_minor) = if horizontal {
        (NODE_W, NODE_H)
    } else {
        (NODE_H, NODE_W)
    };
    let major = 2.0 * MARGIN + ranks as f64 * extent_major + (ranks as f64 - 1.0) * GAP_MAJOR;
    let minor = 2.0 * MARGIN + depth * extent_minor + (depth - 1.0) * GAP_MINOR;
    let (width, height) = if horizontal {
        (major, minor)
    } else {
        (minor, major)
    };

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">"
    );
    let _ = writeln!(out, "<title>{}</title>", escape(&doc.name));
    let _ = writeln!(out, "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\"/></marker></defs>");
    out.push_str("<g class=\"edges\" fill=\"none\" stroke=\"#555555\">\n");
    for edge in &doc.edges {
        let points: Vec<(f64, f64)> = edge
            .path
            .iter()
            .filter_map(|id| centers.get(id.as_str()).copied())
            .collect();
        if points.len() < 2 {
            continue;
        }
        let text: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{x:.1},{y:.1}"))
            .collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" stroke-width=\"{:.2}\" marker-end=\"url(#arrow)\"/>",
            text.join(" "),
            edge.penwidth
        );
        if let Some(label) = &edge.label {
            let (x0, y0) = points[0];
            let (x1, y1) = points[1];
            let _ = writeln!(
                out,
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\" fill=\"#000000\" stroke=\"none\">{}</text>",
                (x0 + x1) / 2.0,
                (y0 + y1) / 2.0 - 4.0,
                escape(label)
            );
        }
    }
    out.push_str("</g>\n<g class=\"nodes\" font-size=\"12\" text-anchor=\"middle\">\n");
    for node in &doc.nodes {
        let (cx, cy) = centers[node.id.as_str()];
        let _ = writeln!(
            out,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{NODE_W:.0}\" height=\"{NODE_H:.0}\" fill=\"#ffffff\" stroke=\"#000000\"/>",
            cx - NODE_W / 2.0,
            cy - NODE_H / 2.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{cx:.1}\" y=\"{:.1}\">{}</text>",
            cy + 4.0,
            escape(&node.label)
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}
