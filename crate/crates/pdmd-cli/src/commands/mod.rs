pub mod generate;
pub mod info;
pub mod predict;
pub mod sensitivity;
pub mod train;
pub mod validate;

/// Shared invocation state: global flags plus the parsed `--config` JSON.
pub struct Context {
    pub seed: u64,
    pub quiet: bool,
    pub config: serde_json::Value,
}

impl Context {
    /// Config fallback for an optional flag; flag values win.
    pub fn lookup<T: serde::de::DeserializeOwned>(&self, key: &str) -> Option<T> {
        let value = self.config.get(key)?;
        serde_json::from_value(value.clone()).ok()
    }

    pub fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }
}
