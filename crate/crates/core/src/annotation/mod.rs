//! Collection workflow: accounts, paragraph leasing, five-pair batches,
//! additional answers, flags and contributor statistics.

pub mod clock;
pub mod error;
pub mod mailer;
pub mod model;
pub mod monitoring;
pub mod onboarding;
pub mod password;
pub mod platform;
pub mod store;

pub use clock::{Clock, ManualClock, SystemClock};
pub use error::{AnnotationError, ErrorCode};
pub use mailer::{LogMailer, Mail, MailKind, Mailer, MemoryMailer};
pub use model::*;
pub use monitoring::{CategoryTotals, MonitoringPage, MonitoringRow};
pub use onboarding::{Assessment, AssessmentOutcome, AssessmentQuestion};
pub use password::PasswordHasher;
pub use platform::{IssuedSession, Platform, PlatformSettings, BATCH_SIZE, validate_answer, validate_pair};
pub use store::{State, Store};
