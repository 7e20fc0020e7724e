use super::Ontology;

/// Canonical text form: declarations, then TBox, then ABox, each block sorted.
pub fn serialize_ontology(o: &Ontology) -> String {
    let o = o.normalized();
    let mut out = String::new();
    let decls = [("Concept", &o.signature.concepts), ("Role", &o.signature.roles), ("Individual", &o.signature.individuals)];
    for (kw, names) in decls {
        for n in names {
            out.push_str(kw);
            out.push(' ');
            out.push_str(n);
            out.push('\n');
        }
    }
    for block in [&o.tbox, &o.abox] {
        let mut lines: Vec<String> = block.iter().map(|ax| ax.to_string()).collect();
        lines.sort();
        lines.dedup();
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
    }
    out
}
