//! ReAct policy over a provider-agnostic chat-completion backend.

use std::collections::VecDeque;
use std::io::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{Outcome, Policy, PolicyError, TurnContext, Usage};
use crate::protocol::{parse, GAME_ACTIONS, SANDBOX_ACTIONS};
use crate::world::Difficulty;

pub const HISTORY_WINDOW: usize = 5;

pub const SYSTEM_TEMPLATE: &str = include_str!("../../assets/prompts/react_system.txt");
pub const USER_TEMPLATE: &str = include_str!("../../assets/prompts/react_user.txt");
pub const SYSTEM_WITH_LEARNINGS_TEMPLATE: &str = include_str!("../../assets/prompts/react_system_learnings.txt");
pub const SANDBOX_SYSTEM_TEMPLATE: &str = include_str!("../../assets/prompts/sandbox_system.txt");
pub const SANDBOX_USER_TEMPLATE: &str = include_str!("../../assets/prompts/sandbox_user.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> ChatMessage {
        ChatMessage { role: "system".into(), content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> ChatMessage {
        ChatMessage { role: "user".into(), content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> ChatMessage {
        ChatMessage { role: "assistant".into(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    #[serde(default)]
    pub usage: Usage,
}

/// A chat-completion service.
pub trait ChatBackend: Send {
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<Completion, PolicyError>;

    fn clone_box(&self) -> Box<dyn ChatBackend>;
}

/// One logged exchange; a log of these is also a replay script.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub messages: Vec<ChatMessage>,
    pub completion: Completion,
}

/// Serves recorded completions in order, for offline runs and tests.
#[derive(Debug, Clone, Default)]
pub struct ReplayBackend {
    completions: VecDeque<Completion>,
}

impl ReplayBackend {
    pub fn new<I: IntoIterator<Item = String>>(texts: I) -> ReplayBackend {
        ReplayBackend { completions: texts.into_iter().map(|text| Completion { text, usage: Usage::default() }).collect() }
    }

    /// Reads a transcript of line-delimited exchanges.
    pub fn from_transcript(text: &str) -> Result<ReplayBackend, serde_json::Error> {
        let completions = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str::<Exchange>(l).map(|e| e.completion))
            .collect::<Result<_, _>>()?;
        Ok(ReplayBackend { completions })
    }

    pub fn remaining(&self) -> usize {
        self.completions.len()
    }
}

impl ChatBackend for ReplayBackend {
    fn complete(&mut self, _messages: &[ChatMessage]) -> Result<Completion, PolicyError> {
        self.completions.pop_front().ok_or_else(|| PolicyError::Transport("replay transcript exhausted".into()))
    }

    fn clone_box(&self) -> Box<dyn ChatBackend> {
        Box::new(self.clone())
    }
}

/// Appends every exchange of the wrapped backend to a line-delimited transcript.
pub struct LoggingBackend {
    inner: Box<dyn ChatBackend>,
    path: PathBuf,
}

impl LoggingBackend {
    pub fn new(inner: Box<dyn ChatBackend>, path: impl Into<PathBuf>) -> LoggingBackend {
        LoggingBackend { inner, path: path.into() }
    }
}

impl ChatBackend for LoggingBackend {
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<Completion, PolicyError> {
        let completion = self.inner.complete(messages)?;
        let line = serde_json::to_string(&Exchange { messages: messages.to_vec(), completion: completion.clone() })
            .expect("exchange serializes");
        std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .and_then(|mut f| writeln!(f, "{line}"))
            .map_err(|e| PolicyError::Transport(format!("cannot write transcript: {e}")))?;
        Ok(completion)
    }

    fn clone_box(&self) -> Box<dyn ChatBackend> {
        Box::new(LoggingBackend { inner: self.inner.clone_box(), path: self.path.clone() })
    }
}

/// Extracts the `Action` and `Action Input` lines and renders the call text.
pub fn action_from_completion(text: &str) -> Result<String, String> {
    let mut action = None;
    let mut input = None;
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("Action Input:") {
            input = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("Action:") {
            action = Some(rest.trim().trim_matches('`').to_string());
            input = None;
        }
    }
    let name = action.filter(|a| !a.is_empty()).ok_or("the response has no `Action:` line")?;
    let name = name.trim_end_matches("()").to_string();
    let args = input.unwrap_or_default();
    let args = args.trim().trim_matches('`').trim();
    let call = format!("{name}({args})");
    parse(&call).map_err(|e| format!("`{call}` is not a valid action: {}", e.message))?;
    Ok(call)
}

pub fn render_system_prompt(horizon: u32, difficulty: Difficulty, manual: &str) -> String {
    SYSTEM_TEMPLATE
        .replace("{horizon}", &horizon.to_string())
        .replace("{difficulty}", difficulty.as_str())
        .replace("{actions_list}", &GAME_ACTIONS.join(", "))
        .replace("{GAMEPLAY_RULES}", manual)
}

pub fn render_sandbox_system_prompt(horizon: u32, difficulty: Difficulty, manual: &str, max_sandbox_steps: u32) -> String {
    SANDBOX_SYSTEM_TEMPLATE
        .replace("{max_sandbox_steps}", &max_sandbox_steps.to_string())
        .replace("{horizon}", &horizon.to_string())
        .replace("{difficulty}", difficulty.as_str())
        .replace("{actions_list}", &GAME_ACTIONS.join(", "))
        .replace("{sandbox_actions_list}", &SANDBOX_ACTIONS.join(", "))
        .replace("{SANDBOX_GAMEPLAY_RULES}", manual)
}

pub fn render_user_prompt(history: &str, observation: &str) -> String {
    USER_TEMPLATE.replace("{REACT_HISTORY}", history).replace("{state_with_error_msg}", observation)
}

const REPROMPT: &str = "Your previous response could not be used: {error}. Answer again using exactly the Thought / Action / Action Input format.";

/// Conditions a chat model on the objective, the manual and the last five
/// (observation, response) pairs.
pub struct ReactPolicy {
    backend: Box<dyn ChatBackend>,
    system_prompt: String,
    history: VecDeque<(String, String)>,
    window: usize,
    usage: Usage,
}

impl ReactPolicy {
    pub fn new(backend: Box<dyn ChatBackend>, system_prompt: String) -> ReactPolicy {
        ReactPolicy { backend, system_prompt, history: VecDeque::new(), window: HISTORY_WINDOW, usage: Usage::default() }
    }

    pub fn history(&self) -> impl Iterator<Item = &(String, String)> {
        self.history.iter()
    }

    fn history_text(&self) -> String {
        self.history
            .iter()
            .map(|(obs, response)| format!("Observation: {obs}\nThought: {}", response.trim()))
            .collect::<Vec<_>>()
            .join("\n\n")
    }

    fn ask(&mut self, messages: &[ChatMessage]) -> Result<String, PolicyError> {
        let completion = self.backend.complete(messages)?;
        self.usage.add(completion.usage);
        self.usage.calls += 1;
        Ok(completion.text)
    }

    fn remember(&mut self, observation: &str, response: String) {
        self.history.push_back((observation.to_string(), response));
        while self.history.len() > self.window {
            self.history.pop_front();
        }
    }
}

impl Policy for ReactPolicy {
    fn name(&self) -> String {
        "react".into()
    }

    fn next_action(&mut self, ctx: &TurnContext<'_>) -> Result<String, PolicyError> {
        let mut messages = vec![
            ChatMessage::system(self.system_prompt.clone()),
            ChatMessage::user(render_user_prompt(&self.history_text(), ctx.observation_text)),
        ];
        let first = self.ask(&messages)?;
        let (response, action) = match action_from_completion(&first) {
            Ok(a) => (first, a),
            Err(error) => {
                messages.push(ChatMessage::assistant(first));
                messages.push(ChatMessage::user(REPROMPT.replace("{error}", &error)));
                let second = self.ask(&messages)?;
                match action_from_completion(&second) {
                    Ok(a) => (second, a),
                    Err(_) => (format!("{}\nAction: wait\nAction Input:", second.trim_end()), "wait()".to_string()),
                }
            }
        };
        self.remember(ctx.observation_text, response);
        Ok(action)
    }

    fn notify(&mut self, _outcome: &Outcome<'_>) {}

    fn fork(&self, _seed: u64) -> Box<dyn Policy> {
        Box::new(ReactPolicy {
            backend: self.backend.clone_box(),
            system_prompt: self.system_prompt.clone(),
            history: self.history.clone(),
            window: self.window,
            usage: Usage::default(),
        })
    }

    fn usage(&self) -> Usage {
        self.usage
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;
    use crate::observe::build_observation;
    use crate::world::{new_park, Layout};

    #[test]
    fn wait_completion() {
        assert_eq!(action_from_completion("Thought: nothing to do\nAction: wait\nAction Input:").unwrap(), "wait()");
    }

    #[test]
    fn place_completion() {
        let text = "Thought: Based on this, I should try to...\nAction: place\nAction Input: x=5, y=12, type=\"ride\", subtype=\"carousel\", subclass=\"yellow\", price=3";
        assert_eq!(
            action_from_completion(text).unwrap(),
            "place(x=5, y=12, type=\"ride\", subtype=\"carousel\", subclass=\"yellow\", price=3)"
        );
    }

    #[test]
    fn malformed_completion_is_rejected() {
        assert!(action_from_completion("I think we should build").is_err());
        assert!(action_from_completion("Action: teleport\nAction Input: x=1").is_err());
    }

    #[test]
    fn system_prompt_is_filled() {
        let p = render_system_prompt(50, Difficulty::Easy, "MANUAL");
        assert!(p.contains("over a 50 day period"));
        assert!(p.contains("*easy difficulty*"));
        assert!(p.contains("place, move, remove, modify, set_research, wait, survey_guests"));
        assert!(p.ends_with("MANUAL\n"));
        assert!(!p.contains('{'));
    }

    fn turn(policy: &mut ReactPolicy, text: &str) -> String {
        let c = Catalog::shipped();
        let s = new_park(&c, Layout::shipped("ribs").unwrap(), Difficulty::Easy, 1);
        let obs = build_observation(&s, &c);
        let ctx = TurnContext { observation_text: text, observation: &obs, state: &s, catalog: &c };
        policy.next_action(&ctx).unwrap()
    }

    #[test]
    fn history_window_evicts_the_oldest_pair() {
        let backend = ReplayBackend::new((0..6).map(|_| "Thought: t\nAction: wait\nAction Input:".to_string()));
        let mut p = ReactPolicy::new(Box::new(backend), "system".into());
        for i in 0..6 {
            assert_eq!(turn(&mut p, &format!("obs{i}")), "wait()");
        }
        let kept: Vec<&str> = p.history().map(|(o, _)| o.as_str()).collect();
        assert_eq!(kept, ["obs1", "obs2", "obs3", "obs4", "obs5"]);
    }

    #[test]
    fn one_reprompt_then_wait() {
        let backend = ReplayBackend::new(["gibberish".to_string(), "Action: wait\nAction Input:".to_string()]);
        let mut p = ReactPolicy::new(Box::new(backend), "system".into());
        assert_eq!(turn(&mut p, "obs"), "wait()");
        assert_eq!(p.usage().calls, 2);

        let backend = ReplayBackend::new(["gibberish".to_string(), "still gibberish".to_string()]);
        let mut p = ReactPolicy::new(Box::new(backend), "system".into());
        assert_eq!(turn(&mut p, "obs"), "wait()");
        assert_eq!(p.usage().calls, 2);
    }

    #[test]
    fn logging_backend_writes_a_replayable_transcript() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chat.jsonl");
        let inner = ReplayBackend::new(["Action: wait\nAction Input:".to_string()]);
        let mut logged = LoggingBackend::new(Box::new(inner), &path);
        logged.complete(&[ChatMessage::user("hi")]).unwrap();
        let replay = ReplayBackend::from_transcript(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(replay.remaining(), 1);
    }
}
