use anyhow::{bail, Context, Result};
use fairalloc::PolicySpec;

/// Parses a policy given on the command line.
///
/// Accepts kind names (`utilitarian`, `random`, `min-gain`,
/// `assign-best-ignoring-capacity`, `assign-worst-ignoring-capacity`),
/// `priority:<attribute>=<0|1>`, or a JSON policy object.
pub fn parse_policy(text: &str) -> Result<PolicySpec> {
    let text = text.trim();
    let spec = if text.starts_with('{') {
        serde_json::from_str(text).with_context(|| format!("invalid policy JSON `{text}`"))?
    } else if let Some(rest) = text.strip_prefix("priority:") {
        let Some((attribute, favored)) = rest.split_once('=') else {
            bail!("expected priority:<attribute>=<0|1>, got `{text}`");
        };
        PolicySpec::priority(attribute, favored.parse().with_context(|| format!("bad group value in `{text}`"))?)
    } else {
        serde_json::from_value(serde_json::json!({ "kind": text }))
            .with_context(|| format!("unknown policy `{text}`"))?
    };
    spec.validate()?;
    Ok(spec)
}

/// Replaces the tie-break scale of every policy that has one.
pub fn with_scale(spec: PolicySpec, scale: f64) -> PolicySpec {
    match spec {
        PolicySpec::Utilitarian { .. } => PolicySpec::Utilitarian { tie_break_scale: scale },
        PolicySpec::MinGain { .. } => PolicySpec::MinGain { tie_break_scale: scale },
        PolicySpec::Mixture { lambda, a, b } => PolicySpec::Mixture {
            lambda,
            a: Box::new(with_scale(*a, scale)),
            b: Box::new(with_scale(*b, scale)),
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_forms() {
        assert_eq!(parse_policy("random").unwrap(), PolicySpec::Random);
        assert_eq!(parse_policy("utilitarian").unwrap(), PolicySpec::utilitarian());
        assert_eq!(parse_policy("priority:group=1").unwrap(), PolicySpec::priority("group", 1));
        let mix = parse_policy(r#"{"kind":"mixture","lambda":0.5,"a":{"kind":"random"},"b":{"kind":"utilitarian"}}"#).unwrap();
        assert_eq!(mix, PolicySpec::mixture(0.5, PolicySpec::Random, PolicySpec::utilitarian()));
        assert!(parse_policy("greedy").is_err());
        assert!(parse_policy("priority:group=2").is_err());
    }

    #[test]
    fn scale_reaches_nested_policies() {
        let spec = with_scale(PolicySpec::mixture(0.5, PolicySpec::Random, PolicySpec::utilitarian()), 100.0);
        assert_eq!(spec, PolicySpec::mixture(0.5, PolicySpec::Random, PolicySpec::Utilitarian { tie_break_scale: 100.0 }));
    }
}
