//! Encrypted gathering of the global class distribution.
//!
//! Uses an additively homomorphic Paillier scheme over integers: with
//! `n = p·q` and generator `g = n + 1`, a count `m` encrypts to
//! `(1 + m·n) · r^n mod n²`. Multiplying ciphertexts adds plaintexts, so a
//! server holding only the public key can sum every client's encrypted
//! class-count vector without seeing any of them. The key holder (one
//! randomly chosen client) decrypts the aggregate.
//!
//! Threat model: semi-honest server, no collusion between the server and
//! the key holder. Key sizes are desk-scale and not meant for production.

use std::time::Instant;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng as _, RngCore};
use serde::{Deserialize, Serialize};

use crate::data::{self, ClassDistribution, ClientShard};
use crate::error::{Error, Result};
use crate::seed::{self, Rng};

pub const DEFAULT_SECURITY_BITS: u64 = 512;
pub const MIN_SECURITY_BITS: u64 = 128;
const MILLER_RABIN_ROUNDS: usize = 40;
const MAX_PRIME_CANDIDATES: usize = 200_000;

const SMALL_PRIMES: [u32; 54] = [
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257,
];

fn random_below(bound: &BigUint, rng: &mut Rng) -> BigUint {
    let bytes = bound.bits().div_ceil(8) as usize + 8;
    let mut buf = vec![0u8; bytes];
    rng.fill_bytes(&mut buf);
    BigUint::from_bytes_le(&buf) % bound
}

fn random_bits(bits: u64, rng: &mut Rng) -> BigUint {
    let mut buf = vec![0u8; bits.div_ceil(8) as usize];
    rng.fill_bytes(&mut buf);
    let mut v = BigUint::from_bytes_le(&buf);
    let excess = (buf.len() as u64 * 8) - bits;
    v >>= excess;
    v
}

/// Miller–Rabin with random bases.
pub fn is_probable_prime(n: &BigUint, rounds: usize, rng: &mut Rng) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    if n.is_even() {
        return *n == two;
    }
    let n_minus_one = n - 1u32;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    let span = n - 3u32;
    'witness: for _ in 0..rounds {
        let a = random_below(&span, rng) + &two;
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn generate_prime(bits: u64, rng: &mut Rng) -> Result<BigUint> {
    for _ in 0..MAX_PRIME_CANDIDATES {
        let mut candidate = random_bits(bits, rng);
        // Top two bits set so the modulus has exactly 2·bits bits; odd.
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(bits - 2, true);
        candidate.set_bit(0, true);
        if is_probable_prime(&candidate, MILLER_RABIN_ROUNDS, rng) {
            return Ok(candidate);
        }
    }
    Err(Error::Keygen(format!(
        "no {bits}-bit prime after {MAX_PRIME_CANDIDATES} candidates"
    )))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    n: BigUint,
    n_squared: BigUint,
    g: BigUint,
}

impl PublicKey {
    pub fn modulus(&self) -> &BigUint {
        &self.n
    }

    pub fn modulus_squared(&self) -> &BigUint {
        &self.n_squared
    }

    pub fn generator(&self) -> &BigUint {
        &self.g
    }

    pub fn bits(&self) -> u64 {
        self.n.bits()
    }

    /// Bytes per serialized ciphertext (fixed width, `n²` sized).
    pub fn ciphertext_bytes(&self) -> usize {
        self.n_squared.bits().div_ceil(8) as usize
    }

    pub fn encrypt(&self, m: u64, rng: &mut Rng) -> Result<BigUint> {
        let value = m;
        let m = BigUint::from(m);
        if m >= self.n {
            return Err(Error::Overflow {
                value,
                bound: self.n.to_string(),
            });
        }
        let r = loop {
            let r = random_below(&self.n, rng);
            if !r.is_zero() && r.gcd(&self.n).is_one() {
                break r;
            }
        };
        // g^m = (1 + n)^m = 1 + m·n (mod n²)
        let gm = (BigUint::one() + &m * &self.n) % &self.n_squared;
        Ok(gm * r.modpow(&self.n, &self.n_squared) % &self.n_squared)
    }

    /// Homomorphic addition.
    pub fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a * b % &self.n_squared
    }
}

/// Secret trapdoor. The only type able to decrypt.
#[derive(Debug, Clone)]
pub struct PrivateKey {
    lambda: BigUint,
    mu: BigUint,
    public: PublicKey,
}

impl PrivateKey {
    pub fn public(&self) -> &PublicKey {
        &self.public
    }

    pub fn decrypt(&self, c: &BigUint) -> Result<BigUint> {
        let pk = &self.public;
        if *c >= pk.n_squared {
            return Err(Error::Protocol("ciphertext outside [0, n²)".into()));
        }
        let u = c.modpow(&self.lambda, &pk.n_squared);
        let l = (u - 1u32) / &pk.n;
        Ok(l * &self.mu % &pk.n)
    }

    pub fn decrypt_vector(&self, v: &CipherVector) -> Result<Vec<u64>> {
        v.ciphertexts
            .iter()
            .map(|c| {
                let m = self.decrypt(c)?;
                u64::try_from(m).map_err(|_| Error::Protocol("decrypted value exceeds u64".into()))
            })
            .collect()
    }
}

/// Capability to recover plaintext counts from an aggregate. Implemented
/// only by types that own the secret key.
pub trait Decrypt {
    fn decrypt_counts(&self, aggregate: &CipherVector) -> Result<Vec<u64>>;
}

impl Decrypt for PrivateKey {
    fn decrypt_counts(&self, aggregate: &CipherVector) -> Result<Vec<u64>> {
        self.decrypt_vector(aggregate)
    }
}

#[derive(Debug, Clone)]
pub struct KeyPair {
    pub public: PublicKey,
    pub private: PrivateKey,
}

pub fn keygen(security_bits: u64, seed: u64) -> Result<KeyPair> {
    if security_bits < MIN_SECURITY_BITS {
        return Err(Error::Keygen(format!(
            "security parameter {security_bits} below {MIN_SECURITY_BITS} bits"
        )));
    }
    let mut rng = seed::rng(seed);
    let half = security_bits.div_ceil(2);
    for _ in 0..16 {
        let p = generate_prime(half, &mut rng)?;
        let q = generate_prime(half, &mut rng)?;
        if p == q {
            continue;
        }
        let n = &p * &q;
        if n.bits() < security_bits {
            continue;
        }
        let p1 = &p - 1u32;
        let q1 = &q - 1u32;
        let lambda = p1.lcm(&q1);
        let Some(mu) = lambda.modinv(&n) else {
            continue;
        };
        let n_squared = &n * &n;
        let g = &n + 1u32;
        let public = PublicKey { n, n_squared, g };
        let private = PrivateKey {
            lambda,
            mu,
            public: public.clone(),
        };
        return Ok(KeyPair { public, private });
    }
    Err(Error::Keygen("could not find a usable prime pair".into()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherVector {
    pub ciphertexts: Vec<BigUint>,
}

impl CipherVector {
    pub fn class_count(&self) -> usize {
        self.ciphertexts.len()
    }

    /// Fixed-width little-endian serialization, `n²` bytes per element.
    pub fn to_bytes(&self, pk: &PublicKey) -> Vec<u8> {
        let width = pk.ciphertext_bytes();
        let mut out = Vec::with_capacity(width * self.ciphertexts.len());
        for c in &self.ciphertexts {
            let mut bytes = c.to_bytes_le();
            bytes.resize(width, 0);
            out.extend_from_slice(&bytes);
        }
        out
    }
}

pub fn encrypt_counts(counts: &[u64], pk: &PublicKey, rng: &mut Rng) -> Result<CipherVector> {
    let ciphertexts = counts
        .iter()
        .map(|&m| pk.encrypt(m, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(CipherVector { ciphertexts })
}

/// Element-wise homomorphic sum.
pub fn aggregate_ciphers(vectors: &[CipherVector], pk: &PublicKey) -> Result<CipherVector> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::Protocol("nothing to aggregate".into()))?;
    let len = first.class_count();
    if let Some(bad) = vectors.iter().find(|v| v.class_count() != len) {
        return Err(Error::Protocol(format!(
            "class count {} differs from {len}",
            bad.class_count()
        )));
    }
    if vectors
        .iter()
        .flat_map(|v| &v.ciphertexts)
        .any(|c| *c >= pk.n_squared)
    {
        return Err(Error::Protocol("ciphertext not under this key".into()));
    }
    let mut acc = first.ciphertexts.clone();
    for v in &vectors[1..] {
        for (a, c) in acc.iter_mut().zip(&v.ciphertexts) {
            *a = pk.add(a, c);
        }
    }
    Ok(CipherVector { ciphertexts: acc })
}

/// A client that generated the key pair and may decrypt aggregates.
#[derive(Debug)]
pub struct KeyHolder {
    pub client_id: usize,
    keys: KeyPair,
}

impl KeyHolder {
    pub fn new(client_id: usize, security_bits: u64, seed: u64) -> Result<Self> {
        Ok(Self {
            client_id,
            keys: keygen(security_bits, seed)?,
        })
    }

    pub fn public_key(&self) -> PublicKey {
        self.keys.public.clone()
    }

    pub fn decrypt_aggregate(&self, aggregate: &CipherVector) -> Result<Vec<u64>> {
        self.keys.private.decrypt_vector(aggregate)
    }
}

impl Decrypt for KeyHolder {
    fn decrypt_counts(&self, aggregate: &CipherVector) -> Result<Vec<u64>> {
        self.decrypt_aggregate(aggregate)
    }
}

/// A client that encrypts and uploads its own class counts.
#[derive(Debug)]
pub struct UploadingClient<'a> {
    pub client_id: usize,
    counts: &'a [u64],
}

impl<'a> UploadingClient<'a> {
    pub fn new(shard: &'a ClientShard) -> Self {
        Self {
            client_id: shard.client_id,
            counts: &shard.class_counts,
        }
    }

    pub fn upload(&self, pk: &PublicKey, rng: &mut Rng) -> Result<CipherVector> {
        encrypt_counts(self.counts, pk, rng)
    }
}

/// The aggregating server. Holds public material only.
#[derive(Debug)]
pub struct Server {
    pk: PublicKey,
    received: Vec<CipherVector>,
}

impl Server {
    pub fn new(pk: PublicKey) -> Self {
        Self {
            pk,
            received: Vec::new(),
        }
    }

    pub fn receive(&mut self, upload: CipherVector) {
        self.received.push(upload);
    }

    pub fn aggregate(&self) -> Result<CipherVector> {
        aggregate_ciphers(&self.received, &self.pk)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: String,
    pub millis: f64,
    pub bytes_plain: u64,
    pub bytes_cipher: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub key_holder: usize,
    pub clients: usize,
    pub num_classes: usize,
    pub security_bits: u64,
    pub steps: Vec<StepReport>,
}

impl ProtocolReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn step(&self, name: &str) -> Option<&StepReport> {
        self.steps.iter().find(|s| s.step == name)
    }
}

/// Plaintext bytes of one class-count vector (`u64` per class).
pub fn plaintext_bytes(num_classes: usize) -> u64 {
    8 * num_classes as u64
}

/// Runs key generation, encryption and upload, server aggregation, and
/// key-holder decryption in-process. Reported byte counts are per client
/// for the upload step and per message elsewhere.
pub fn run_protocol(
    shards: &[ClientShard],
    security_bits: u64,
    seed: u64,
) -> Result<(ClassDistribution, ProtocolReport)> {
    if shards.is_empty() {
        return Err(Error::Protocol("no clients".into()));
    }
    let classes = shards[0].class_counts.len();
    let mut rng = seed::rng_for(seed, &[seed::STREAM_PROTOCOL]);
    let holder_index = rng.random_range(0..shards.len());
    let mut steps = Vec::with_capacity(4);

    let t = Instant::now();
    let holder = KeyHolder::new(
        shards[holder_index].client_id,
        security_bits,
        seed::derive(seed, &[seed::STREAM_PROTOCOL, 1]),
    )?;
    let pk = holder.public_key();
    steps.push(StepReport {
        step: "keygen".into(),
        millis: t.elapsed().as_secs_f64() * 1e3,
        bytes_plain: 0,
        bytes_cipher: (pk.modulus().bits().div_ceil(8)) as u64,
    });

    let t = Instant::now();
    let mut server = Server::new(pk.clone());
    let mut cipher_bytes = 0u64;
    for shard in shards {
        let upload = UploadingClient::new(shard).upload(&pk, &mut rng)?;
        cipher_bytes += upload.to_bytes(&pk).len() as u64;
        server.receive(upload);
    }
    let upload_ms = t.elapsed().as_secs_f64() * 1e3;
    steps.push(StepReport {
        step: "encrypt_upload".into(),
        millis: upload_ms / shards.len() as f64,
        bytes_plain: plaintext_bytes(classes),
        bytes_cipher: cipher_bytes / shards.len() as u64,
    });

    let t = Instant::now();
    let aggregate = server.aggregate()?;
    steps.push(StepReport {
        step: "aggregate".into(),
        millis: t.elapsed().as_secs_f64() * 1e3,
        bytes_plain: 0,
        bytes_cipher: aggregate.to_bytes(&pk).len() as u64,
    });

    let t = Instant::now();
    let counts = holder.decrypt_aggregate(&aggregate)?;
    let distribution = ClassDistribution::from_counts(counts)?;
    steps.push(StepReport {
        step: "decrypt".into(),
        millis: t.elapsed().as_secs_f64() * 1e3,
        bytes_plain: plaintext_bytes(classes),
        bytes_cipher: 0,
    });

    debug_assert_eq!(
        data::global_distribution(shards).ok().as_ref(),
        Some(&distribution)
    );
    Ok((
        distribution,
        ProtocolReport {
            key_holder: holder.client_id,
            clients: shards.len(),
            num_classes: classes,
            security_bits,
            steps,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_keys() -> KeyPair {
        keygen(256, 7).unwrap()
    }

    #[test]
    fn miller_rabin_known_values() {
        let mut rng = seed::rng(1);
        for p in [2u64, 3, 5, 257, 65_537, 2_147_483_647, 1_000_000_007] {
            assert!(is_probable_prime(&BigUint::from(p), 40, &mut rng), "{p}");
        }
        // 561 and 41041 are Carmichael numbers.
        for c in [1u64, 4, 561, 41_041, 1_000_000_008, 2_147_483_649] {
            assert!(!is_probable_prime(&BigUint::from(c), 40, &mut rng), "{c}");
        }
    }

    #[test]
    fn keygen_meets_bit_length() {
        let kp = small_keys();
        assert!(kp.public.bits() >= 256);
        assert!(keygen(64, 1).is_err());
    }

    #[test]
    fn keygen_is_seeded() {
        assert_eq!(
            keygen(128, 3).unwrap().public,
            keygen(128, 3).unwrap().public
        );
    }

    #[test]
    fn encrypt_zero_and_randomization() {
        let kp = small_keys();
        let mut rng = seed::rng(2);
        let c = kp.public.encrypt(0, &mut rng).unwrap();
        assert_eq!(kp.private.decrypt(&c).unwrap(), BigUint::zero());
        let a = kp.public.encrypt(42, &mut rng).unwrap();
        let b = kp.public.encrypt(42, &mut rng).unwrap();
        assert_ne!(a, b);
        assert!(a < *kp.public.modulus_squared());
    }

    #[test]
    fn homomorphic_sum() {
        let kp = small_keys();
        let mut rng = seed::rng(3);
        let a = encrypt_counts(&[3, 3], &kp.public, &mut rng).unwrap();
        let b = encrypt_counts(&[5, 5], &kp.public, &mut rng).unwrap();
        let sum = aggregate_ciphers(&[a.clone(), b], &kp.public).unwrap();
        assert_eq!(kp.private.decrypt_vector(&sum).unwrap(), vec![8, 8]);
        let single = aggregate_ciphers(&[a], &kp.public).unwrap();
        assert_eq!(kp.private.decrypt_vector(&single).unwrap(), vec![3, 3]);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let kp = small_keys();
        let mut rng = seed::rng(4);
        let a = encrypt_counts(&[1, 2], &kp.public, &mut rng).unwrap();
        let b = encrypt_counts(&[1, 2, 3], &kp.public, &mut rng).unwrap();
        assert!(matches!(
            aggregate_ciphers(&[a, b], &kp.public),
            Err(Error::Protocol(_))
        ));
        assert!(aggregate_ciphers(&[], &kp.public).is_err());
    }

    #[test]
    fn ciphertext_size_is_linear_in_classes() {
        let kp = small_keys();
        let mut rng = seed::rng(5);
        let ten = encrypt_counts(&[1; 10], &kp.public, &mut rng).unwrap();
        let hundred = encrypt_counts(&[1; 100], &kp.public, &mut rng).unwrap();
        let per = kp.public.ciphertext_bytes();
        assert_eq!(ten.to_bytes(&kp.public).len(), 10 * per);
        assert_eq!(hundred.to_bytes(&kp.public).len(), 100 * per);
    }
}
