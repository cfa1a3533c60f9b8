//! Randomized property checks shared by the property and acceptance suites.
//! All randomness is seeded; failures carry the offending substitution.

// each including test binary uses its own subset of these helpers
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use substconj::blocks::{block_coding, compose_lags, hat_with_coding};
use substconj::epimorph::{brute_force_epis, enumerate_epis};
use substconj::graphs::{block_graph, letter_graph};
use substconj::procedures::{partition_stream, substitution_automorphisms};
use substconj::verify::is_amalgamation_of;
use substconj::{Alphabet, Letter, LetterMap, ProjectedSystem, Substitution};

pub const SEED: u64 = 0xC0FFEE;

pub fn random_primitive(rng: &mut ChaCha8Rng) -> Substitution {
    loop {
        let c = rng.gen_range(2..=4usize);
        let l = rng.gen_range(2..=3usize);
        let images: Vec<Vec<Letter>> = (0..c)
            .map(|_| (0..l).map(|_| rng.gen_range(0..c as Letter)).collect())
            .collect();
        if let Ok(s) = Substitution::new(Alphabet::canonical(c), images) {
            if s.is_primitive() {
                return s;
            }
        }
    }
}

/// Run `check` on `n` seeded random primitive substitutions; collect failures.
pub fn for_samples(
    n: usize,
    mut check: impl FnMut(&mut ChaCha8Rng, &Substitution) -> Result<(), String>,
) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = Vec::new();
    for i in 0..n {
        let s = random_primitive(&mut rng);
        if let Err(msg) = check(&mut rng, &s) {
            failures.push(format!("sample {i} [{}]: {msg}", s.rules_string()));
        }
    }
    failures
}

/// First-letter projection from the 2-block alphabet back onto the base.
fn pi0(s: &Substitution) -> Result<LetterMap, String> {
    let coding = block_coding(s, 2).map_err(|e| e.to_string())?;
    let class_of: Vec<usize> = coding.blocks().iter().map(|b| b[0] as usize).collect();
    LetterMap::from_class_of(
        coding.coded_alphabet(),
        class_of,
        s.alphabet().names().to_vec(),
    )
    .map_err(|e| e.to_string())
}

/// The intertwining relation survives raising both sides to powers.
pub fn check_power_law(s: &Substitution) -> Result<(), String> {
    let coding = block_coding(s, 2).map_err(|e| e.to_string())?;
    let hat = hat_with_coding(s, &coding, 0).map_err(|e| e.to_string())?;
    let pi = pi0(s)?;
    for n in 1..=5 {
        let sp = s.power(n).map_err(|e| e.to_string())?;
        let hp = hat.power(n).map_err(|e| e.to_string())?;
        if !is_amalgamation_of(&sp, &hp, &pi) {
            return Err(format!("power law failed at n={n}"));
        }
    }
    Ok(())
}

/// Composing hats of lags M (outer) and M' (inner) is the hat of the squared
/// substitution at lag M'·L + M.
pub fn check_lag_composition(s: &Substitution) -> Result<(), String> {
    let l = s.length();
    let coding = block_coding(s, 2).map_err(|e| e.to_string())?;
    let s2 = s.power(2).map_err(|e| e.to_string())?;
    for m in 0..l {
        let outer = hat_with_coding(s, &coding, m).map_err(|e| e.to_string())?;
        for m_inner in 0..l {
            let inner = hat_with_coding(s, &coding, m_inner).map_err(|e| e.to_string())?;
            let composed_images: Vec<Vec<Letter>> = (0..inner.size())
                .map(|b| outer.apply(inner.image(b as Letter)).unwrap())
                .collect();
            let lhs = Substitution::new(coding.coded_alphabet(), composed_images)
                .map_err(|e| e.to_string())?;
            let rhs = hat_with_coding(&s2, &coding, compose_lags(m, m_inner, l))
                .map_err(|e| e.to_string())?;
            if lhs != rhs {
                return Err(format!("lag composition failed at M={m}, M'={m_inner}"));
            }
        }
    }
    Ok(())
}

/// Hat-substitution factors project letterwise into the base language.
pub fn check_language_projection(s: &Substitution) -> Result<(), String> {
    let coding = block_coding(s, 2).map_err(|e| e.to_string())?;
    let hat = hat_with_coding(s, &coding, 0).map_err(|e| e.to_string())?;
    for k in [2usize, 5, 9, 12] {
        let base = s.language(k).map_err(|e| e.to_string())?;
        for w in hat.language(k).map_err(|e| e.to_string())? {
            let projected: Vec<Letter> = w.iter().map(|&b| coding.word_of(b)[0]).collect();
            if !base.contains(&projected) {
                return Err(format!("projected {k}-factor outside base language"));
            }
        }
    }
    Ok(())
}

fn random_partition(rng: &mut ChaCha8Rng, alphabet: &Alphabet) -> LetterMap {
    let mut rgs = vec![0usize];
    let mut max = 0;
    for _ in 1..alphabet.size() {
        let v = rng.gen_range(0..=max + 1);
        max = max.max(v);
        rgs.push(v);
    }
    LetterMap::from_rgs(alphabet, &rgs).unwrap()
}

/// The pruned search and the exhaustive search agree on every case.
pub fn check_epi_oracle(rng: &mut ChaCha8Rng, s: &Substitution) -> Result<(), String> {
    let pi = random_partition(rng, s.alphabet());
    let sys = ProjectedSystem::new(s.clone(), pi).map_err(|e| e.to_string())?;
    let g1 = letter_graph(&sys).map_err(|e| e.to_string())?;
    for m in 0..s.length() {
        let glm = block_graph(&sys, s.length(), m).map_err(|e| e.to_string())?;
        let fast = enumerate_epis(&g1, &glm).map_err(|e| e.to_string())?.0;
        let brute = brute_force_epis(&g1, &glm, 10_000_000).map_err(|e| e.to_string())?;
        if fast != brute {
            return Err(format!(
                "search mismatch at M={m}: {} vs {}",
                fast.len(),
                brute.len()
            ));
        }
    }
    Ok(())
}

/// The standard form is a fixed point and is blind to relabelings.
pub fn check_standard_form(rng: &mut ChaCha8Rng, s: &Substitution) -> Result<(), String> {
    let (form, _) = s.standard_form();
    if form.standard_form().0 != form {
        return Err("standard form is not idempotent".into());
    }
    let c = s.size();
    let mut perm: Vec<Letter> = (0..c as Letter).collect();
    for i in (1..c).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let mut images = vec![Vec::new(); c];
    for a in 0..c {
        images[perm[a] as usize] = s.image(a as Letter).iter().map(|&x| perm[x as usize]).collect();
    }
    let relabeled = Substitution::new(Alphabet::canonical(c), images).map_err(|e| e.to_string())?;
    if relabeled.standard_form().0 != form {
        return Err(format!("relabeling by {perm:?} changed the standard form"));
    }
    Ok(())
}

/// Orbit representatives under the automorphism group cover all partitions.
pub fn check_symmetry_losslessness(s: &Substitution) -> Result<(), String> {
    let autos = substitution_automorphisms(s);
    let all = partition_stream(s.alphabet(), &[]);
    let reduced = partition_stream(s.alphabet(), &autos);
    let mut covered = std::collections::BTreeSet::new();
    for map in &reduced {
        for p in &autos {
            let classes: Vec<Vec<Letter>> = map
                .classes()
                .iter()
                .map(|cl| cl.iter().map(|&a| p[a as usize]).collect())
                .collect();
            let image = LetterMap::from_classes(s.alphabet(), &classes).map_err(|e| e.to_string())?;
            covered.insert(image.rgs().to_vec());
        }
    }
    if covered.len() != all.len() {
        return Err(format!(
            "orbits cover {} of {} partitions",
            covered.len(),
            all.len()
        ));
    }
    Ok(())
}

/// Everything at once, for the acceptance gate.
pub fn run_suite(n: usize) -> Vec<String> {
    let mut failures = for_samples(n, |_, s| check_power_law(s));
    failures.extend(for_samples(n, |_, s| check_lag_composition(s)));
    failures.extend(for_samples(n, |_, s| check_language_projection(s)));
    failures.extend(for_samples(n, check_epi_oracle));
    failures.extend(for_samples(n, check_standard_form));
    failures.extend(for_samples(n, |_, s| check_symmetry_losslessness(s)));
    failures
}
