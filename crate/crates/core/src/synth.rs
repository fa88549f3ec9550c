//! Synthetic comment corpora for demos and testing. Real discussion dumps
//! are rarely shareable, so examples and fixtures generate Russian-looking
//! comment streams with controllable behavior profiles: many casual
//! commenters posting a handful of short messages, plus an optional small
//! group of heavy posters with elevated `!`/`?` usage.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Comment;
use crate::som::derive_seed;

/// Character inventory with per-character sampling weights.
struct CharProfile {
    chars: Vec<char>,
    cumulative: Vec<f64>,
}

impl CharProfile {
    fn new(weighted: &[(char, f64)]) -> Self {
        let total: f64 = weighted.iter().map(|(_, w)| w).sum();
        let mut cumulative = Vec::with_capacity(weighted.len());
        let mut acc = 0.0;
        for (_, w) in weighted {
            acc += w / total;
            cumulative.push(acc);
        }
        CharProfile {
            chars: weighted.iter().map(|(c, _)| *c).collect(),
            cumulative,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> char {
        let r = rng.gen::<f64>();
        for (i, &c) in self.cumulative.iter().enumerate() {
            if r < c {
                return self.chars[i];
            }
        }
        *self.chars.last().unwrap()
    }

    fn message(&self, rng: &mut ChaCha8Rng, len: usize) -> String {
        (0..len).map(|_| self.sample(rng)).collect()
    }
}

/// Baseline letter weights loosely following Russian letter frequencies.
/// The vowel "э" is deliberately absent so that one tracked feature stays
/// constant at zero across the whole corpus.
fn base_weights(excl: f64, quest: f64, vowel_jitter: &[f64; 8]) -> Vec<(char, f64)> {
    let vowels = [
        ('а', 0.080),
        ('е', 0.072),
        ('и', 0.055),
        ('о', 0.090),
        ('у', 0.021),
        ('э', 0.0),
        ('ю', 0.004),
        ('я', 0.015),
    ];
    let mut weights: Vec<(char, f64)> = vowels
        .iter()
        .zip(vowel_jitter)
        .map(|(&(c, w), &j)| (c, w * j))
        .collect();
    weights.push(('!', excl));
    weights.push(('?', quest));
    weights.push((' ', 0.130));
    for &(c, w) in &[
        ('т', 0.060),
        ('н', 0.060),
        ('с', 0.050),
        ('р', 0.045),
        ('в', 0.045),
        ('л', 0.040),
        ('к', 0.035),
        ('м', 0.030),
        ('д', 0.030),
        ('п', 0.025),
        ('ь', 0.018),
        ('б', 0.015),
        ('г', 0.015),
        ('з', 0.015),
        ('ч', 0.014),
        ('й', 0.012),
        ('ж', 0.010),
        ('ш', 0.010),
        ('х', 0.009),
        ('ц', 0.005),
    ] {
        weights.push((c, w));
    }
    weights
}

fn jitter(rng: &mut ChaCha8Rng) -> [f64; 8] {
    let mut j = [1.0; 8];
    for v in &mut j {
        *v = 0.9 + rng.gen::<f64>() * 0.2;
    }
    j
}

/// Generates a discussion with `normal_users` casual participants (1..=5
/// medium-length messages each) and `troll_users` heavy posters (28..=40
/// long messages with elevated `!`/`?` rates). Troll user ids carry the
/// prefix `troll_`; normal ids the prefix `user_`. Deterministic given the
/// seed.
pub fn planted_troll_corpus(normal_users: usize, troll_users: usize, seed: u64) -> Vec<Comment> {
    let mut comments = Vec::new();

    for i in 0..normal_users {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1000 + i as u64));
        let excl = 0.001 + rng.gen::<f64>() * 0.003;
        let quest = 0.001 + rng.gen::<f64>() * 0.003;
        let vj = jitter(&mut rng);
        let profile = CharProfile::new(&base_weights(excl, quest, &vj));
        let messages = 1 + rng.gen_range(0..5);
        let user_id = format!("user_{i:04}");
        for _ in 0..messages {
            let len = 40 + rng.gen_range(0..61);
            comments.push(Comment::new(&user_id, profile.message(&mut rng, len)));
        }
    }

    for i in 0..troll_users {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2000 + i as u64));
        let excl = 0.040 + rng.gen::<f64>() * 0.015;
        let quest = 0.040 + rng.gen::<f64>() * 0.015;
        let vj = jitter(&mut rng);
        let profile = CharProfile::new(&base_weights(excl, quest, &vj));
        let messages = 32 + rng.gen_range(0..9);
        let user_id = format!("troll_{i}");
        for _ in 0..messages {
            let len = 220 + rng.gen_range(0..81);
            comments.push(Comment::new(&user_id, profile.message(&mut rng, len)));
        }
    }

    comments
}
