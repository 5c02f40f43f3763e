//! Element retention and content-function classification.
//!
//! An element's function comes from its tag, its `role` attribute and the
//! user-input listeners captured on it. Multimedia wins over interactive when
//! both apply to the same element (a `<video controls>` is still a video).

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snapshot::DomNode;

/// End-user function of a piece of content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Function {
    Multimedia,
    Interactive,
}

impl Function {
    pub const ALL: [Function; 2] = [Function::Multimedia, Function::Interactive];

    pub fn as_str(self) -> &'static str {
        match self {
            Function::Multimedia => "multimedia",
            Function::Interactive => "interactive",
        }
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Function {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("multimedia") {
            Ok(Function::Multimedia)
        } else if s.eq_ignore_ascii_case("interactive") {
            Ok(Function::Interactive)
        } else {
            Err(Error::config(format!("unknown function \"{s}\"")))
        }
    }
}

/// Tags that never render as content.
const NON_RENDERED_TAGS: &[&str] = &[
    "head", "script", "style", "meta", "link", "title", "template", "noscript",
];

const MEDIA_SRC_HOSTS: &[&str] = &[
    "youtube.com/embed",
    "youtube-nocookie.com/embed",
    "player.vimeo.com",
    "dailymotion.com/embed",
];

const MEDIA_SRC_EXTENSIONS: &[&str] = &[
    ".mp4", ".webm", ".ogv", ".ogg", ".mp3", ".m4a", ".wav", ".m3u8", ".mpd",
];

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Tag, role and listener sets driving classification.
///
/// `a` counts as interactive only with an `href`, and `iframe` counts as
/// multimedia only when its `src` points at a media file or a known player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub multimedia_tags: BTreeSet<String>,
    pub interactive_tags: BTreeSet<String>,
    pub interactive_roles: BTreeSet<String>,
    pub interactive_events: BTreeSet<String>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            multimedia_tags: set(&[
                "video", "audio", "object", "img", "picture", "canvas", "embed", "svg", "iframe",
            ]),
            interactive_tags: set(&["a", "button", "input", "select", "textarea", "details", "label"]),
            interactive_roles: set(&[
                "button", "link", "checkbox", "slider", "tab", "menuitem", "switch", "textbox",
            ]),
            interactive_events: set(&[
                "click", "dblclick", "mousedown", "mouseup", "keydown", "keyup", "keypress",
                "touchstart", "touchend", "pointerdown", "pointerup", "input", "change", "submit",
            ]),
        }
    }
}

impl ClassifierConfig {
    /// Load overrides from JSON; keys that are absent keep their defaults.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let mut cfg: ClassifierConfig = serde_json::from_slice(bytes)?;
        for s in [
            &mut cfg.multimedia_tags,
            &mut cfg.interactive_tags,
            &mut cfg.interactive_roles,
            &mut cfg.interactive_events,
        ] {
            *s = s.iter().map(|v| v.to_ascii_lowercase()).collect();
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&bytes)
    }

    /// Whether the element takes part in logical-tree construction.
    pub fn is_retained(&self, node: &DomNode) -> bool {
        if NON_RENDERED_TAGS.contains(&node.tag.as_str()) || !node.visible {
            return false;
        }
        let bare_leaf = node.children.is_empty() && node.text_len == 0 && node.listeners.is_empty();
        !(bare_leaf && node.rect.is_empty())
    }

    pub fn classify_element(&self, node: &DomNode) -> Option<Function> {
        self.classify(&node.tag, |name| node.attr(name), node.listeners.iter().map(String::as_str))
    }

    /// Classification from the raw signals; pure in its inputs.
    pub fn classify<'a>(
        &self,
        tag: &str,
        attr: impl Fn(&str) -> Option<&'a str>,
        mut listeners: impl Iterator<Item = &'a str>,
    ) -> Option<Function> {
        if self.multimedia_tags.contains(tag) && (tag != "iframe" || is_media_src(attr("src"))) {
            return Some(Function::Multimedia);
        }
        if self.interactive_tags.contains(tag) && (tag != "a" || attr("href").is_some()) {
            return Some(Function::Interactive);
        }
        if let Some(role) = attr("role") {
            if role
                .split_whitespace()
                .any(|r| self.interactive_roles.contains(&r.to_ascii_lowercase()))
            {
                return Some(Function::Interactive);
            }
        }
        if listeners.any(|l| self.interactive_events.contains(l)) {
            return Some(Function::Interactive);
        }
        None
    }
}

fn is_media_src(src: Option<&str>) -> bool {
    let Some(src) = src else { return false };
    let lower = src.to_ascii_lowercase();
    let path = lower.split(['?', '#']).next().unwrap_or("");
    MEDIA_SRC_HOSTS.iter().any(|h| lower.contains(h))
        || MEDIA_SRC_EXTENSIONS.iter().any(|e| path.ends_with(e))
}
