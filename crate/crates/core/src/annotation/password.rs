use argon2::password_hash::{PasswordHash, PasswordHasher as _, PasswordVerifier, SaltString};
use argon2::{Algorithm, Argon2, Params, Version};

/// Salted Argon2id hashing. Cost parameters are configurable so tests can
/// run with a cheap setting.
#[derive(Debug, Clone)]
pub struct PasswordHasher {
    params: Params,
}

impl Default for PasswordHasher {
    fn default() -> Self {
        PasswordHasher { params: Params::default() }
    }
}

impl PasswordHasher {
    pub fn with_cost(memory_kib: u32, iterations: u32) -> Result<Self, argon2::Error> {
        Ok(PasswordHasher { params: Params::new(memory_kib, iterations, 1, None)? })
    }

    /// Minimal cost, for tests only.
    pub fn fast() -> Self {
        Self::with_cost(Params::MIN_M_COST, 1).expect("minimal argon2 params are valid")
    }

    fn argon(&self) -> Argon2<'static> {
        Argon2::new(Algorithm::Argon2id, Version::V0x13, self.params.clone())
    }

    pub fn hash(&self, password: &str) -> String {
        let salt = SaltString::encode_b64(&rand::random::<[u8; 16]>()).expect("16-byte salt is valid");
        self.argon()
            .hash_password(password.as_bytes(), &salt)
            .expect("hashing with valid params cannot fail")
            .to_string()
    }

    /// Constant-time check against a PHC string. Malformed hashes never verify.
    pub fn verify(&self, password: &str, phc: &str) -> bool {
        match PasswordHash::new(phc) {
            Ok(parsed) => self.argon().verify_password(password.as_bytes(), &parsed).is_ok(),
            Err(_) => false,
        }
    }
}
