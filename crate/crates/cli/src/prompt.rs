//! The dual prompt: a fixed system prompt plus the bundle as user message.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bundle::ReportBundle;
use crate::error::{Error, Result};

pub const SYSTEM_PROMPT: &str = include_str!("../assets/system_prompt.md");
pub const SYSTEM_PROMPT_SHA256: &str = "6160d3909dc203d3464b757618e82c8e4c445bc4e1a6697c993aa13c9c841ed7";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptPair {
    pub system: String,
    pub user: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Fails unless `text` is byte-identical to the stored system prompt.
pub fn verify_system_prompt(text: &str) -> Result<()> {
    let got = sha256_hex(text.as_bytes());
    if got != SYSTEM_PROMPT_SHA256 {
        return Err(Error::Schema {
            pointer: String::new(),
            message: format!("system prompt fixture corrupted (sha256 {got})"),
        });
    }
    Ok(())
}

pub fn assemble_prompts(b: &ReportBundle) -> Result<PromptPair> {
    verify_system_prompt(SYSTEM_PROMPT)?;
    Ok(PromptPair {
        system: SYSTEM_PROMPT.to_string(),
        user: b.to_json()?,
    })
}
