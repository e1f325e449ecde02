//! Live backend speaking the prevailing open inference-server wire format:
//! `/chat/completions` and `/embeddings` as popularized by OpenAI-compatible
//! servers, plus the `/rerank` route served by TEI/Jina-style rerankers.

use serde::Deserialize;
use serde_json::json;

use crate::error::{Error, Result};

use super::{ChatRequest, ModelBackend, Role};

/// One capability endpoint: base URL (through `/v1` where applicable),
/// model name, and optional bearer key.
#[derive(Debug, Clone)]
pub struct HttpEndpoint {
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
}

pub struct HttpBackend {
    chat: HttpEndpoint,
    embedding: HttpEndpoint,
    rerank: HttpEndpoint,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(chat: HttpEndpoint, embedding: HttpEndpoint, rerank: HttpEndpoint) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(120))
            .build()
            .map_err(|e| Error::Config(format!("http client: {e}")))?;
        Ok(Self {
            chat,
            embedding,
            rerank,
            client,
        })
    }

    fn post(&self, endpoint: &HttpEndpoint, route: &str, body: serde_json::Value) -> Result<serde_json::Value> {
        let url = format!("{}/{}", endpoint.base_url.trim_end_matches('/'), route);
        let mut req = self.client.post(&url).json(&body);
        if let Some(key) = &endpoint.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| Error::Transport {
            attempts: 1,
            message: format!("{url}: {e}"),
        })?;
        let status = resp.status();
        if !status.is_success() {
            let body = resp.text().unwrap_or_default();
            return Err(Error::Transport {
                attempts: 1,
                message: format!("{url}: HTTP {status}: {body}"),
            });
        }
        resp.json().map_err(|e| Error::Transport {
            attempts: 1,
            message: format!("{url}: invalid JSON body: {e}"),
        })
    }
}

fn role_str(role: Role) -> &'static str {
    match role {
        Role::System => "system",
        Role::User => "user",
        Role::Assistant => "assistant",
    }
}

pub(crate) fn chat_body(req: &ChatRequest, model: &str, temperature: f64) -> serde_json::Value {
    let messages: Vec<serde_json::Value> = req
        .messages
        .iter()
        .map(|m| json!({"role": role_str(m.role), "content": m.text}))
        .collect();
    let mut body = json!({
        "model": model,
        "messages": messages,
        "temperature": temperature,
    });
    if let Some(max) = req.max_tokens {
        body["max_tokens"] = json!(max);
    }
    if req.response_schema.is_some() {
        body["response_format"] = json!({"type": "json_object"});
    }
    body
}

#[derive(Deserialize)]
struct ChatCompletion {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
}

#[derive(Deserialize)]
struct ChatChoiceMessage {
    content: String,
}

#[derive(Deserialize)]
struct EmbeddingList {
    data: Vec<EmbeddingItem>,
}

#[derive(Deserialize)]
struct EmbeddingItem {
    index: usize,
    embedding: Vec<f64>,
}

#[derive(Deserialize)]
struct RerankReply {
    results: Vec<RerankItem>,
}

#[derive(Deserialize)]
struct RerankItem {
    index: usize,
    relevance_score: f64,
}

impl ModelBackend for HttpBackend {
    fn chat(&self, req: &ChatRequest, temperature: f64) -> Result<String> {
        let body = chat_body(req, &self.chat.model, temperature);
        let value = self.post(&self.chat, "chat/completions", body)?;
        let parsed: ChatCompletion = serde_json::from_value(value)
            .map_err(|e| Error::malformed("chat completion reply", e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| Error::malformed("chat completion reply", "no choices"))
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        let body = json!({"model": self.embedding.model, "input": texts});
        let value = self.post(&self.embedding, "embeddings", body)?;
        let parsed: EmbeddingList = serde_json::from_value(value)
            .map_err(|e| Error::malformed("embeddings reply", e.to_string()))?;
        let mut out = vec![Vec::new(); texts.len()];
        for item in parsed.data {
            if item.index >= out.len() {
                return Err(Error::malformed("embeddings reply", "index out of range"));
            }
            out[item.index] = item.embedding;
        }
        Ok(out)
    }

    fn rerank(&self, query: &str, candidates: &[(String, String)]) -> Result<Vec<f64>> {
        let documents: Vec<&str> = candidates.iter().map(|(_, text)| text.as_str()).collect();
        let body = json!({
            "model": self.rerank.model,
            "query": query,
            "documents": documents,
        });
        let value = self.post(&self.rerank, "rerank", body)?;
        let parsed: RerankReply = serde_json::from_value(value)
            .map_err(|e| Error::malformed("rerank reply", e.to_string()))?;
        let mut out = vec![0.0; candidates.len()];
        for item in parsed.results {
            if item.index >= out.len() {
                return Err(Error::malformed("rerank reply", "index out of range"));
            }
            out[item.index] = item.relevance_score;
        }
        Ok(out)
    }

    fn name(&self) -> &'static str {
        "http"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::ChatMessage;

    #[test]
    fn test_chat_body_shape() {
        let req = ChatRequest::new("t", vec![ChatMessage::user("hi")]).with_schema("x");
        let body = chat_body(&req, "m1", 0.1);
        assert_eq!(body["model"], "m1");
        assert_eq!(body["temperature"], 0.1);
        assert_eq!(body["messages"][0]["role"], "user");
        assert_eq!(body["response_format"]["type"], "json_object");
    }
}
