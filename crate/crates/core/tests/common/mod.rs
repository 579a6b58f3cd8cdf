#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use annoforge_core::annotation::*;
use annoforge_core::category::Category;
use annoforge_core::squad::{AnswerEntry, ArticleEntry, Dataset, ParagraphEntry};
use annoforge_core::text::{char_slice, word_spans};
use chrono::Duration;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod curation_fixture;
pub mod metrics_fixture;
pub mod oracles;

pub const TEXTS: [&str; 4] = [
    "Le général Leclerc meurt de la fièvre jaune en 1802 à Saint-Domingue.",
    "Avec une population de 38 millions d'habitants, la Pologne est un grand pays.",
    "Paris est la capitale de la France et compte deux millions d'habitants.",
    "La Grèce partage des frontières maritimes avec l'Italie, l'Albanie et la Turquie.",
];

pub struct Harness {
    pub platform: Arc<Platform>,
    pub clock: Arc<ManualClock>,
    pub mailer: Arc<MemoryMailer>,
}

pub fn harness_with(settings: PlatformSettings) -> Harness {
    let clock = Arc::new(ManualClock::epoch());
    let mailer = Arc::new(MemoryMailer::default());
    let platform = Platform::new(Store::in_memory(), settings)
        .with_clock(clock.clone())
        .with_mailer(mailer.clone())
        .with_hasher(PasswordHasher::fast());
    Harness { platform: Arc::new(platform), clock, mailer }
}

pub fn harness() -> Harness {
    harness_with(PlatformSettings::default())
}

impl Harness {
    /// A verified, onboarded contributor.
    pub fn contributor(&self, email: &str, status: ContributorStatus) -> UserId {
        self.platform.provision_user(email, "unused".into(), Role::Regular, status).unwrap().id
    }

    pub fn admin(&self, email: &str, role: Role) -> UserId {
        self.platform.provision_user(email, "unused".into(), role, ContributorStatus::Certified).unwrap().id
    }

    pub fn load(&self, articles: &[(&str, Category, &[&str])]) {
        self.platform.load_corpus(&dataset(articles)).unwrap();
    }

    pub fn context(&self, paragraph_id: &str) -> String {
        self.platform.read(|s| s.paragraph_text(paragraph_id).unwrap().to_string())
    }

    pub fn advance_minutes(&self, m: i64) {
        self.clock.advance(Duration::minutes(m));
    }

    /// Lease a paragraph and submit five valid pairs on it.
    pub fn annotate(&self, user: UserId, category: Category) -> BatchReceipt {
        let (para, lease) = self.platform.lease_next_paragraph(user, category).unwrap();
        self.platform.submit_batch(user, lease.id, &five_pairs(&para.text)).unwrap()
    }

    pub fn answer_next(&self, user: UserId) -> Result<QuestionState, AnnotationError> {
        let task = self.platform.next_additional_task(user)?;
        let answer = word_answer(&task.paragraph.text, 0);
        self.platform.submit_additional_answer(user, &task.question_id, &answer)
    }
}

pub fn dataset(articles: &[(&str, Category, &[&str])]) -> Dataset {
    Dataset::new(
        articles
            .iter()
            .map(|(title, cat, paras)| ArticleEntry {
                title: title.to_string(),
                category: Some(*cat),
                paragraphs: paras.iter().map(|p| ParagraphEntry { context: p.to_string(), qas: vec![] }).collect(),
            })
            .collect(),
    )
}

/// The `n`-th word of `context` as an answer.
pub fn word_answer(context: &str, n: usize) -> AnswerEntry {
    let spans = word_spans(context);
    let w = spans[n % spans.len()];
    AnswerEntry { text: char_slice(context, w.start, w.len()).unwrap().to_string(), answer_start: w.start }
}

pub fn five_pairs(context: &str) -> Vec<PairInput> {
    (0..BATCH_SIZE)
        .map(|i| PairInput { question: format!("Quelle est la réponse numéro {} ?", i + 1), answer: word_answer(context, i) })
        .collect()
}

/// Cut the first character off the first word of the answer.
pub fn misaligned(answer: &AnswerEntry) -> AnswerEntry {
    let mut chars = answer.text.chars();
    chars.next();
    AnswerEntry { text: chars.collect(), answer_start: answer.answer_start + 1 }
}

/// Independent re-check of the completion rule on the raw stored records.
pub fn completion_violations(p: &Platform) -> Vec<String> {
    p.read(|s| {
        s.questions
            .values()
            .filter(|q| q.state == QuestionStatus::Complete)
            .filter_map(|q| {
                let mut ids = vec![q.author_id];
                ids.extend(q.additional_answers.iter().map(|a| a.user_id));
                let answers = ids.len();
                ids.sort();
                ids.dedup();
                (answers != 3 || ids.len() != 3).then(|| format!("{} has {answers} answers from {} users", q.question_id, ids.len()))
            })
            .collect()
    })
}

/// Run one random operation sequence against a small platform and check
/// the invariants after every step.
pub fn simulate(seed: u64, steps: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = harness();
    h.load(&[("A", Category::Arts, &TEXTS[..2]), ("B", Category::Arts, &TEXTS[2..])]);
    let users: Vec<UserId> = (0..4)
        .map(|i| {
            let status = if i == 0 { ContributorStatus::Open } else { ContributorStatus::Certified };
            h.contributor(&format!("u{i}@example.org"), status)
        })
        .collect();
    let mut leases: HashMap<UserId, LeaseId> = HashMap::new();
    let mut tasks: HashMap<UserId, String> = HashMap::new();
    let mut completed = 0;
    for step in 0..steps {
        let u = users[rng.gen_range(0..users.len())];
        let p = &h.platform;
        match rng.gen_range(0..8) {
            0 => {
                if let Ok((_, lease)) = p.lease_next_paragraph(u, Category::Arts) {
                    leases.insert(u, lease.id);
                }
            }
            1 => {
                let lease = leases.get(&u).copied().unwrap_or(rng.gen_range(0..5));
                let context = p.read(|s| {
                    s.leases.get(&lease).and_then(|l| match &l.target {
                        LeaseTarget::Paragraph(pid) => s.paragraph_text(pid).map(str::to_string),
                        _ => None,
                    })
                });
                let mut pairs = five_pairs(context.as_deref().unwrap_or(TEXTS[0]));
                match rng.gen_range(0..4) {
                    0 => {
                        pairs.pop();
                    }
                    1 => pairs[2].answer = misaligned(&pairs[2].answer),
                    _ => {}
                }
                let _ = p.submit_batch(u, lease, &pairs);
            }
            2 | 3 => {
                if let Ok(task) = p.next_additional_task(u) {
                    tasks.insert(u, task.question_id);
                }
            }
            4 | 5 => {
                let qid = match tasks.get(&u) {
                    Some(q) if rng.gen_bool(0.9) => q.clone(),
                    _ => p.read(|s| s.questions.keys().nth(rng.gen_range(0..s.questions.len().max(1))).cloned()).unwrap_or_default(),
                };
                let Some(q) = p.question(&qid) else { continue };
                let context = h.context(&q.paragraph_id);
                let mut answer = word_answer(&context, rng.gen_range(0..8));
                if rng.gen_bool(0.1) {
                    answer = misaligned(&answer);
                }
                if let Ok(state) = p.submit_additional_answer(u, &qid, &answer) {
                    completed += usize::from(state.state == QuestionStatus::Complete);
                }
            }
            6 => {
                if let Some(qid) = tasks.get(&u) {
                    if rng.gen_bool(0.3) {
                        let _ = p.flag_question(u, qid, FlagReason::ALL[rng.gen_range(0..3)]);
                    }
                }
            }
            _ => match rng.gen_range(0..3) {
                0 => h.advance_minutes(rng.gen_range(1..45)),
                1 => {
                    if let Some(&l) = leases.get(&u) {
                        let _ = p.renew_lease(u, l);
                    }
                }
                _ => h.advance_minutes(1),
            },
        }
        p.check_invariants().map_err(|e| format!("seed {seed} step {step}: {e}"))?;
        if let Some(v) = completion_violations(p).first() {
            return Err(format!("seed {seed} step {step}: {v}"));
        }
    }
    Ok(completed)
}
