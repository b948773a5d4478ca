use crate::error::{Error, Result};

/// Placeholder replaced by the style token.
pub const STYVEC_PLACEHOLDER: &str = "[styvec]";

/// Training prompt shared by every grid kind. Subjects are never named.
pub const PROMPT_TEMPLATE: &str =
    "This is a four-panel image on a uniform solid-color background, \
hand-drawn in style, with the subjects highlighted and kept as simple as possible:\n\
\n\
[TOP-LEFT]: Image of the structure of a subject.\n\
[TOP-RIGHT]: An edited version of the [TOP-LEFT] image, transformed to [styvec] style.\n\
[BOTTOM-LEFT]: Skeleton or structural image of another subject.\n\
[BOTTOM-RIGHT]: An edited version of the [BOTTOM-LEFT] image, applying the same style \
transformation as used in [TOP-RIGHT].";

pub fn render_prompt(styvec: &str) -> Result<String> {
    if styvec.is_empty() {
        return Err(Error::InvalidParameter("styvec token is empty".into()));
    }
    if styvec.contains(['\n', '\r']) {
        return Err(Error::InvalidParameter(
            "styvec token must not contain line breaks".into(),
        ));
    }
    Ok(PROMPT_TEMPLATE.replacen(STYVEC_PLACEHOLDER, styvec, 1))
}
