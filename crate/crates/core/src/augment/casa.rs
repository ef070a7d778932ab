//! Frame × context synthesis of labeled question–answer pairs.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{AugmentError, AugmentResources, ClientError, GeneratorClient, RhetoricalFrame};
use crate::data::{ClarityLabel, QAPair, Source};
use crate::rng::child_rng;

pub const CONTEXT_SLOT: &str = "{CONTEXT}";

/// One synthetic item before any generator is involved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CasaDraft {
    pub frame: String,
    pub label: ClarityLabel,
    pub context: String,
    pub question: String,
    /// The frame with its slots filled; the offline answer.
    pub filled: String,
}

fn label_instruction(label: ClarityLabel) -> &'static str {
    match label {
        ClarityLabel::ClearReply => "a clear reply that directly answers the question",
        ClarityLabel::Ambivalent => "an ambivalent reply that appears to respond but stays vague or partial",
        ClarityLabel::ClearNonReply => "a clear non-reply that openly declines or is unable to answer",
    }
}

impl CasaDraft {
    pub fn prompt(&self) -> String {
        format!(
            "Write one answer a politician might give at a press briefing.\n\
             Question: {}\n\
             The answer must be {}.\n\
             Follow this rhetorical frame: \"{}\"\n\
             Example: {}\n\
             Reply with the answer text only.",
            self.question,
            label_instruction(self.label),
            self.frame,
            self.filled
        )
    }
}

/// Draft `index` drawn from its own child seed, so drafts do not depend on
/// how generation is scheduled.
pub fn casa_draft(frames: &[RhetoricalFrame], resources: &AugmentResources, seed: u64, index: usize) -> CasaDraft {
    let mut rng = child_rng(seed, &[index as u64]);
    let frame = frames.choose(&mut rng).expect("frames checked non-empty");
    let context = resources.contexts.choose(&mut rng).map_or("this matter", String::as_str);
    let entity = resources.entities.choose(&mut rng).map_or("the administration", String::as_str);
    let template = resources
        .question_templates
        .choose(&mut rng)
        .map_or("What is your position on {CONTEXT}?", String::as_str);
    CasaDraft {
        frame: frame.template.clone(),
        label: frame.label,
        context: context.to_string(),
        question: template.replace(CONTEXT_SLOT, context),
        filled: frame.fill(context, entity),
    }
}

/// Exactly `n` frame-synthetic records. Offline (no client) the filled frame
/// is the answer and output is a pure function of the seed; with a client
/// each draft's prompt is sent and any failure discards the whole batch.
pub fn casa_generate(
    frames: &[RhetoricalFrame],
    resources: &AugmentResources,
    n: usize,
    client: Option<&dyn GeneratorClient>,
    seed: u64,
    id_prefix: &str,
) -> Result<Vec<QAPair>, AugmentError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if frames.is_empty() {
        return Err(AugmentError::NoFrames);
    }
    if resources.contexts.is_empty() {
        return Err(AugmentError::Resource("no contexts".into()));
    }
    let build = |i: usize| -> Result<QAPair, AugmentError> {
        let draft = casa_draft(frames, resources, seed, i);
        let answer = match client {
            Some(c) => {
                let text = c.generate(&draft.prompt())?;
                if text.trim().is_empty() {
                    return Err(ClientError::EmptyResponse.into());
                }
                text
            }
            None => draft.filled.clone(),
        };
        let mut pair = QAPair::new(format!("{id_prefix}{i}"), draft.question, answer)?
            .with_clarity(draft.label)?
            .with_source(Source::FrameSynthetic);
        pair.meta.insert("frame".into(), draft.frame);
        pair.meta.insert("context".into(), draft.context);
        if let Some(c) = client {
            pair.meta.insert("generator".into(), c.name().to_string());
        }
        Ok(pair)
    };
    match client {
        Some(c) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(c.max_concurrency().max(1))
                .build()
                .map_err(|e| AugmentError::Resource(e.to_string()))?;
            pool.install(|| (0..n).into_par_iter().map(build).collect())
        }
        None => (0..n).into_par_iter().map(build).collect(),
    }
}
