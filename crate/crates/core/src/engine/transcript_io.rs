use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::Message;

#[derive(Debug, Error)]
pub enum TranscriptIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// One JSON object per message, one message per line.
pub fn write_jsonl<W: Write>(messages: &[Message], mut out: W) -> Result<(), TranscriptIoError> {
    for message in messages {
        serde_json::to_writer(&mut out, message).map_err(|source| TranscriptIoError::Json {
            line: message.seq as usize + 1,
            source,
        })?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<Message>, TranscriptIoError> {
    let mut messages = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        messages.push(serde_json::from_str(&line).map_err(|source| TranscriptIoError::Json { line: i + 1, source })?);
    }
    Ok(messages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::Usage;
    use crate::model::Role;
    use serde_json::Value;

    #[test]
    fn one_object_per_line_with_message_field_names() {
        let m = Message {
            seq: 0,
            round: 0,
            sender: "functional".into(),
            role: Role::Debater,
            recipients: ["non_functional".to_string()].into(),
            content: "line one\nline two".into(),
            usage: Usage::new(12, 3),
        };
        let mut buf = Vec::new();
        write_jsonl(&[m.clone(), Message { seq: 1, ..m.clone() }], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        let v: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            ["content", "recipients", "role", "round", "sender", "seq", "usage"]
        );
        assert_eq!(v["role"], "debater");
        assert_eq!(v["usage"]["input_tokens"], 12);
        assert_eq!(read_jsonl(buf.as_slice()).unwrap()[1].seq, 1);
    }

    #[test]
    fn bad_line_is_reported() {
        let err = read_jsonl("{}\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TranscriptIoError::Json { line: 1, .. }));
    }
}
