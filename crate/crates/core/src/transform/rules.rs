use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    FmToCui,
    CuiToFm,
    FmToReport,
}

/// IF `matches` THEN `action`.
pub struct Rule<C, A> {
    pub id: &'static str,
    pub condition: &'static str,
    pub extension: bool,
    pub matches: fn(&C) -> bool,
    pub action: fn(&C) -> A,
}

impl<C, A> Clone for Rule<C, A> {
    fn clone(&self) -> Self {
        Rule { ..*self }
    }
}

impl<C, A> Rule<C, A> {
    pub fn info(&self, direction: Direction) -> RuleInfo {
        RuleInfo {
            id: self.id,
            direction,
            condition: self.condition,
            extension: self.extension,
        }
    }
}

pub struct RuleSet<C, A> {
    pub direction: Direction,
    pub rules: Vec<Rule<C, A>>,
}

impl<C, A> Clone for RuleSet<C, A> {
    fn clone(&self) -> Self {
        RuleSet {
            direction: self.direction,
            rules: self.rules.clone(),
        }
    }
}

impl<C, A> RuleSet<C, A> {
    pub fn first_match(&self, ctx: &C) -> Option<&Rule<C, A>> {
        self.rules.iter().find(|r| (r.matches)(ctx))
    }

    pub fn infos(&self) -> Vec<RuleInfo> {
        self.rules.iter().map(|r| r.info(self.direction)).collect()
    }

    /// Checks that rule ids are unique.
    pub fn check(&self) -> Result<(), String> {
        let mut seen = std::collections::HashSet::new();
        for r in &self.rules {
            if !seen.insert(r.id) {
                return Err(format!("duplicate rule id {}", r.id));
            }
        }
        Ok(())
    }
}

/// Registry entry, as dumped for documentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleInfo {
    pub id: &'static str,
    pub direction: Direction,
    pub condition: &'static str,
    pub extension: bool,
}

/// Every built-in rule, in firing order per direction.
pub fn registry() -> Vec<RuleInfo> {
    let cui = super::cui_rules();
    let mut out = vec![RuleInfo {
        id: "TR1",
        direction: Direction::FmToCui,
        condition: "first element of the page (document root)",
        extension: false,
    }];
    out.extend(cui.labels.infos());
    out.extend(cui.items.infos());
    out.push(RuleInfo {
        id: "EXT-SUBMIT",
        direction: Direction::FmToCui,
        condition: "end of page",
        extension: true,
    });
    out.extend(super::fm_rules().infos());
    out.extend(super::report_rules().infos());
    out
}

pub fn registry_json() -> String {
    serde_json::to_string_pretty(&registry()).expect("registry serializes")
}
