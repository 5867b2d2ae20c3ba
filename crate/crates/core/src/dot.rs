//! Graphviz DOT rendering.

use std::fmt::Write as _;

use crate::cset::CSetInstance;
use crate::error::Result;
use crate::signed::{ImpliedLink, SignedGraph};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// A CLD with primitive links solid and blue, labelled by sign, and the
/// given implied links dashed.
pub fn cld_to_dot(cld: &CSetInstance, implied: &[ImpliedLink]) -> Result<String> {
    let g = SignedGraph::from_cld(cld)?;
    let mut s = String::from("digraph cld {\n  rankdir=LR;\n  node [shape=plaintext];\n");
    for (i, name) in g.names.iter().enumerate() {
        writeln!(s, "  v{} [label={}];", i + 1, quote(name)).unwrap();
    }
    for &(a, b, sign) in &g.edges {
        writeln!(s, "  v{} -> v{} [label=\"{sign}\", color=blue, fontcolor=blue];", a + 1, b + 1).unwrap();
    }
    for l in implied {
        writeln!(
            s,
            "  v{} -> v{} [label=\"{}\", style=dashed, color=gray40];",
            l.src + 1,
            l.tgt + 1,
            l.sign
        )
        .unwrap();
    }
    s.push_str("}\n");
    Ok(s)
}

/// Stocks as boxes, flows as labelled edges between stocks (clouds for
/// open ends), sum and auxiliary variables and parameters as ellipses with
/// dotted information links.
pub fn sfd_to_dot(sfd: &CSetInstance) -> Result<String> {
    sfd.ensure_valid()?;
    let mut s = String::from("digraph sfd {\n  rankdir=LR;\n");
    for i in 0..sfd.nparts("S") {
        writeln!(s, "  s{} [shape=box, label={}];", i + 1, quote(sfd.name_of(i, "sname"))).unwrap();
    }
    for i in 0..sfd.nparts("SV") {
        writeln!(s, "  sv{} [shape=ellipse, style=bold, label={}];", i + 1, quote(sfd.name_of(i, "svname"))).unwrap();
    }
    for i in 0..sfd.nparts("V") {
        writeln!(s, "  v{} [shape=ellipse, label={}];", i + 1, quote(sfd.name_of(i, "vname"))).unwrap();
    }
    for i in 0..sfd.nparts("P") {
        writeln!(s, "  p{} [shape=diamond, label={}];", i + 1, quote(sfd.name_of(i, "pname"))).unwrap();
    }
    for f in 0..sfd.nparts("F") {
        let from = sfd.incident("ofn", f);
        let to = sfd.incident("ifn", f);
        let src = match from.first() {
            Some(&o) => format!("s{}", sfd.subpart(o, "os") + 1),
            None => {
                writeln!(s, "  cloud_in{} [shape=point];", f + 1).unwrap();
                format!("cloud_in{}", f + 1)
            }
        };
        let tgt = match to.first() {
            Some(&i) => format!("s{}", sfd.subpart(i, "is") + 1),
            None => {
                writeln!(s, "  cloud_out{} [shape=point];", f + 1).unwrap();
                format!("cloud_out{}", f + 1)
            }
        };
        writeln!(s, "  {src} -> {tgt} [penwidth=3, label={}];", quote(sfd.name_of(f, "fname"))).unwrap();
        writeln!(s, "  v{} -> {tgt} [style=dotted, arrowhead=none];", sfd.subpart(f, "fv") + 1).unwrap();
    }
    for (table, src, srcp, tgt) in [
        ("LV", "lvs", "s", "lvv"),
        ("LSV", "lsvsv", "sv", "lsvv"),
        ("LPV", "lpvp", "p", "lpvv"),
        ("LVV", "lvsrc", "v", "lvtgt"),
    ] {
        for r in 0..sfd.nparts(table) {
            writeln!(
                s,
                "  {srcp}{} -> v{} [style=dashed];",
                sfd.subpart(r, src) + 1,
                sfd.subpart(r, tgt) + 1
            )
            .unwrap();
        }
    }
    for r in 0..sfd.nparts("LS") {
        writeln!(s, "  s{} -> sv{} [style=dashed];", sfd.subpart(r, "lss") + 1, sfd.subpart(r, "lssv") + 1).unwrap();
    }
    s.push_str("}\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cset::Sign;
    use crate::schemas::build_cld;

    #[test]
    fn cld_dot_has_signed_edges() {
        let cld = build_cld(&["a \"q\"", "b"], &[("a \"q\"", "b", Sign::Neg)]).unwrap();
        let dot = cld_to_dot(&cld, &[]).unwrap();
        assert!(dot.starts_with("digraph cld {"));
        assert!(dot.contains("v1 -> v2 [label=\"-\""));
        assert!(dot.contains("label=\"a \\\"q\\\"\""));
        assert!(dot.trim_end().ends_with('}'));
    }
}
