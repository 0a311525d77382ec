/// Splits a caption into lowercase alphanumeric tokens.
///
/// URLs (`http://` or `https://` up to the next whitespace) are dropped, and
/// every character that is neither a letter nor a digit separates tokens,
/// which also strips `#` and `@` prefixes from hashtags and mentions.
pub fn tokenize(raw: &str) -> Vec<String> {
    let lower = raw.to_lowercase();
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut rest = lower.as_str();

    while let Some(c) = rest.chars().next() {
        if rest.starts_with("http://") || rest.starts_with("https://") {
            flush(&mut current, &mut tokens);
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            rest = &rest[end..];
            continue;
        }
        if c.is_alphanumeric() {
            current.push(c);
        } else {
            flush(&mut current, &mut tokens);
        }
        rest = &rest[c.len_utf8()..];
    }
    flush(&mut current, &mut tokens);
    tokens
}

fn flush(current: &mut String, tokens: &mut Vec<String>) {
    if !current.is_empty() {
        tokens.push(std::mem::take(current));
    }
}
