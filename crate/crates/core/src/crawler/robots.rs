//! Minimal robots.txt support: `Disallow` prefixes of groups that name
//! `User-agent: *`.

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RobotsRules {
    disallow: Vec<String>,
}

impl RobotsRules {
    pub fn allow_all() -> Self {
        RobotsRules::default()
    }

    pub fn parse(text: &str) -> Self {
        let mut disallow = Vec::new();
        let mut group_applies = false;
        // A run of consecutive user-agent lines opens one group.
        let mut in_agent_run = false;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or_default().trim();
            let Some((field, value)) = line.split_once(':') else {
                continue;
            };
            let field = field.trim().to_ascii_lowercase();
            let value = value.trim();
            match field.as_str() {
                "user-agent" => {
                    if !in_agent_run {
                        group_applies = false;
                    }
                    in_agent_run = true;
                    group_applies |= value == "*";
                }
                "disallow" => {
                    in_agent_run = false;
                    if group_applies && !value.is_empty() {
                        disallow.push(value.to_string());
                    }
                }
                _ => in_agent_run = false,
            }
        }
        RobotsRules { disallow }
    }

    /// `path` is the URL path plus query.
    pub fn allows(&self, path: &str) -> bool {
        !self.disallow.iter().any(|prefix| path.starts_with(prefix.as_str()))
    }
}
