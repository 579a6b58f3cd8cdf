use std::sync::Mutex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MailKind {
    Verification,
    PasswordReset,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mail {
    pub to: String,
    pub kind: MailKind,
    pub token: String,
}

pub trait Mailer: Send + Sync {
    fn send(&self, mail: Mail);
}

/// Development mailer: writes the link to the log instead of sending it.
#[derive(Debug, Clone)]
pub struct LogMailer {
    pub base_url: String,
}

impl Mailer for LogMailer {
    fn send(&self, mail: Mail) {
        let path = match mail.kind {
            MailKind::Verification => "verify",
            MailKind::PasswordReset => "password-reset",
        };
        log::info!("mail to {}: {}/{}?token={}", mail.to, self.base_url.trim_end_matches('/'), path, mail.token);
    }
}

/// Keeps sent mail in memory; tests read tokens back from it.
#[derive(Debug, Default)]
pub struct MemoryMailer(Mutex<Vec<Mail>>);

impl MemoryMailer {
    pub fn sent(&self) -> Vec<Mail> {
        self.0.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn last_token(&self, to: &str, kind: MailKind) -> Option<String> {
        self.sent().into_iter().rev().find(|m| m.to == to && m.kind == kind).map(|m| m.token)
    }
}

impl Mailer for MemoryMailer {
    fn send(&self, mail: Mail) {
        self.0.lock().unwrap_or_else(|e| e.into_inner()).push(mail);
    }
}
