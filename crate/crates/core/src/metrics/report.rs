use std::fmt::Write as _;

/// One `name<TAB>config<TAB>value` line per metric.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricReport {
    pub entries: Vec<MetricEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricEntry {
    pub name: String,
    pub config: String,
    pub value: f64,
}

impl MetricReport {
    pub fn push(&mut self, name: impl Into<String>, config: impl Into<String>, value: f64) {
        self.entries.push(MetricEntry {
            name: name.into(),
            config: config.into(),
            value,
        });
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.value)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("metric\tconfig\tvalue\n");
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}\t{:.6}", e.name, e.config, e.value);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_layout() {
        let mut r = MetricReport::default();
        r.push("accuracy", "M=8 K=3", 93.5);
        assert_eq!(r.to_text(), "metric\tconfig\tvalue\naccuracy\tM=8 K=3\t93.500000\n");
        assert_eq!(r.get("accuracy"), Some(93.5));
        assert_eq!(r.get("auc"), None);
    }
}
