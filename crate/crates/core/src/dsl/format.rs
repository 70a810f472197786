use crate::error::{domain, Result};
use crate::exact::format_ratio;
use crate::model::Scenario;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Canonical text: one field per line in alphabetical order, reduced
/// rationals, single spaces. Only piecewise models have a text form.
pub fn format_scenario(scenario: &Scenario) -> Result<String> {
    let pw = scenario.model.as_piecewise().ok_or_else(|| {
        domain(format!(
            "scenario {} is not a piecewise model and has no text form",
            scenario.name
        ))
    })?;
    let d = &scenario.defaults;
    let mut fields: Vec<(&str, String)> = Vec::new();
    let rational =
        |key, v: &Option<num_rational::BigRational>, fields: &mut Vec<(&str, String)>| {
            if let Some(v) = v {
                fields.push((key, format_ratio(v)));
            }
        };
    rational("alpha", &d.alpha, &mut fields);
    rational("delta", &d.delta, &mut fields);
    rational("eps", &d.eps, &mut fields);
    fields.push(("index_set", pw.on_set.to_string()));
    fields.push(("limit", quote(&scenario.model.limit_label)));
    let monotone = if pw.off_tail_monotone {
        " offtail_monotone"
    } else {
        ""
    };
    fields.push(("off_tail", format!("{}{monotone}", pw.off_tail)));
    fields.push(("on_tail", pw.on_tail.to_string()));
    rational("p", &d.p, &mut fields);
    if let Some(t) = &scenario.theta {
        fields.push(("theta", t.to_string()));
    }
    let mut out = format!("scenario {} {{\n", quote(&scenario.name));
    for (k, v) in fields {
        out.push_str(&format!("  {k} = {v};\n"));
    }
    out.push_str("}\n");
    Ok(out)
}
