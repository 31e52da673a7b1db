//! Shared fixtures for integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: &[&str] = &[
    "the", "of", "and", "to", "a", "in", "that", "he", "was", "it", "his", "is", "with", "as",
    "i", "had", "for", "at", "by", "on", "not", "be", "from", "but", "she", "which", "you",
    "her", "they", "this", "have", "or", "were", "all", "one", "their", "we", "there", "so",
    "would", "an", "been", "my", "no", "when", "him", "if", "what", "said", "who", "will",
    "are", "them", "more", "could", "out", "into", "up", "then", "some", "man", "very", "upon",
    "little", "time", "than", "only", "about", "any", "other", "may", "now", "before", "great",
    "should", "made", "must", "like", "know", "over", "well", "such", "good", "old", "see",
    "down", "first", "again", "after", "come", "two", "never", "long", "much", "day", "how",
    "house", "own", "might", "through", "think", "way", "even", "where", "those", "most",
    "life", "came", "these", "here", "while", "eyes", "hand", "himself", "without", "place",
    "under", "young", "night", "still", "every", "thought", "being", "nothing", "away",
    "heart", "father", "mother", "world", "things", "once", "last", "found", "always",
    "however", "friend", "morning", "master", "whole", "almost", "letter", "evening",
    "country", "voice", "round", "answered", "family", "people", "together", "against",
    "moment", "captain", "returned", "perhaps", "question", "replied", "business", "water",
    "brother", "remember", "because", "between", "whatever", "journey", "garden", "window",
    "darkness", "quietly", "strange", "certainly", "believe", "looked", "towards", "another",
    "surprise", "opinion", "speaking", "happiness", "ship", "sea", "road", "river", "horse",
];

/// Deterministic English-like prose: Zipf-weighted words, sentences with
/// capitals and punctuation, paragraphs separated by blank lines.
pub fn english_corpus(min_bytes: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (1..=WORDS.len()).map(|r| 1.0 / r as f64).collect();
    let total: f64 = weights.iter().sum();
    let pick = |rng: &mut ChaCha8Rng| -> &'static str {
        let mut x = rng.gen::<f64>() * total;
        for (w, word) in weights.iter().zip(WORDS) {
            if x < *w {
                return word;
            }
            x -= w;
        }
        WORDS[0]
    };
    let mut out = String::with_capacity(min_bytes + 1024);
    while out.len() < min_bytes {
        let sentences = rng.gen_range(3..9);
        for s in 0..sentences {
            let n = rng.gen_range(5..22);
            for i in 0..n {
                let word = pick(&mut rng);
                if i == 0 {
                    let mut c = word.chars();
                    let first = c.next().unwrap().to_ascii_uppercase();
                    out.push(first);
                    out.push_str(c.as_str());
                } else {
                    out.push(' ');
                    out.push_str(word);
                    if i + 1 < n && rng.gen_bool(0.08) {
                        out.push(',');
                    }
                }
            }
            out.push(match rng.gen_range(0..10) {
                0 => '?',
                1 => '!',
                _ => '.',
            });
            if s + 1 < sentences {
                out.push(' ');
            }
        }
        out.push_str("\n\n");
    }
    out.into_bytes()
}

pub fn random_bytes(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    let mut v = vec![0u8; len];
    rng.fill(v.as_mut_slice());
    v
}
