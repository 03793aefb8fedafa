//! Deterministic synthetic corpora and career trajectories.
//!
//! Background authors are split into communities arranged on a ring. Most
//! co-authors come from the paper's own community and the rest from an
//! adjacent one (a planted partition with ring-local bridges), so the
//! collaboration distance between communities grows with ring distance.
//!
//! Two archetypes sit on top of the background:
//!
//! * hyperprolific authors publish at least 72 papers a year, cite themselves
//!   heavily and are cited only from their home community;
//! * high-reach authors publish a few papers a year and are cited from
//!   communities up to `citation_radius` steps away on the ring.

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::analysis::cohort::HYPERPROLIFIC_PAPERS_PER_YEAR;
use crate::analysis::trajectory::SERIES_LEN;
use crate::corpus::PaperRecord;
use crate::error::{Error, Result};
use crate::rng;

/// Background papers a citing paper may reach back to.
const CITATION_LOOKBACK_YEARS: i32 = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchetypeProfile {
    pub count: usize,
    pub papers_per_year: usize,
    /// Ring distance of the communities that cite this archetype. 0 means the
    /// home community only; `r > 0` means communities 1..=r steps away.
    pub citation_radius: usize,
    /// Probability that one reference of an eligible background paper points
    /// at this archetype.
    pub citation_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub first_year: i32,
    pub last_year: i32,
    pub n_background_authors: usize,
    pub community_count: usize,
    pub background_papers_per_year: usize,
    pub min_authors_per_paper: usize,
    pub max_authors_per_paper: usize,
    /// Co-authors sit within this many positions of the lead author in the
    /// community's member list, which stretches distances inside a community.
    pub coauthor_span: usize,
    pub references_per_paper: usize,
    /// Probability that a co-author is drawn from an adjacent community.
    pub inter_community_edge_prob: f64,
    /// Probability that a background reference leaves the home community.
    pub cross_community_citation_prob: f64,
    /// Share of a hyperprolific paper's references that are self-citations.
    pub hp_self_citation_prob: f64,
    pub hp_profile: ArchetypeProfile,
    pub ta_profile: ArchetypeProfile,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            first_year: 2000,
            last_year: 2014,
            n_background_authors: 1_200,
            community_count: 8,
            background_papers_per_year: 400,
            min_authors_per_paper: 2,
            max_authors_per_paper: 4,
            coauthor_span: 10,
            references_per_paper: 8,
            inter_community_edge_prob: 0.05,
            cross_community_citation_prob: 0.1,
            hp_self_citation_prob: 0.5,
            hp_profile: ArchetypeProfile {
                count: 6,
                papers_per_year: 75,
                citation_radius: 0,
                citation_rate: 0.02,
            },
            ta_profile: ArchetypeProfile {
                count: 6,
                papers_per_year: 2,
                citation_radius: 4,
                citation_rate: 0.05,
            },
        }
    }
}

impl SynthConfig {
    /// Roughly 50,000 papers and 500,000 citations over twenty years.
    pub fn throughput() -> Self {
        SynthConfig {
            seed: 7,
            first_year: 2000,
            last_year: 2019,
            n_background_authors: 8_000,
            community_count: 16,
            background_papers_per_year: 2_200,
            references_per_paper: 12,
            coauthor_span: 40,
            hp_profile: ArchetypeProfile {
                count: 8,
                papers_per_year: 75,
                citation_radius: 0,
                citation_rate: 0.01,
            },
            ta_profile: ArchetypeProfile {
                count: 10,
                papers_per_year: 3,
                citation_radius: 8,
                citation_rate: 0.02,
            },
            ..SynthConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.community_count == 0 {
            return bad("community_count must be >= 1".into());
        }
        if self.first_year > self.last_year {
            return bad("first_year must not exceed last_year".into());
        }
        if self.min_authors_per_paper == 0
            || self.min_authors_per_paper > self.max_authors_per_paper
        {
            return bad("need 1 <= min_authors_per_paper <= max_authors_per_paper".into());
        }
        if self.coauthor_span == 0 {
            return bad("coauthor_span must be >= 1".into());
        }
        if self.n_background_authors < self.community_count * self.max_authors_per_paper {
            return bad("every community needs at least max_authors_per_paper members".into());
        }
        for (name, p) in [
            ("inter_community_edge_prob", self.inter_community_edge_prob),
            (
                "cross_community_citation_prob",
                self.cross_community_citation_prob,
            ),
            ("hp_self_citation_prob", self.hp_self_citation_prob),
            ("hp_profile.citation_rate", self.hp_profile.citation_rate),
            ("ta_profile.citation_rate", self.ta_profile.citation_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if self.hp_profile.citation_rate + self.ta_profile.citation_rate > 1.0 {
            return bad("archetype citation rates must sum to at most 1".into());
        }
        for (name, profile) in [
            ("hp_profile", &self.hp_profile),
            ("ta_profile", &self.ta_profile),
        ] {
            if profile.count > 0 && profile.papers_per_year == 0 {
                return bad(format!("{name}.papers_per_year must be >= 1"));
            }
        }
        if self.hp_profile.count > 0
            && self.hp_profile.papers_per_year < HYPERPROLIFIC_PAPERS_PER_YEAR
        {
            return bad(format!(
                "hp_profile.papers_per_year must be >= {HYPERPROLIFIC_PAPERS_PER_YEAR}"
            ));
        }
        Ok(())
    }
}

/// Generated records plus the archetype memberships.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthCorpus {
    pub records: Vec<PaperRecord>,
    pub hp_authors: Vec<String>,
    pub ta_authors: Vec<String>,
}

struct Archetype {
    id: String,
    home: usize,
    center: usize,
    papers: Vec<usize>,
}

struct Generator<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
    records: Vec<PaperRecord>,
    members: Vec<Vec<String>>,
    /// Background papers per community per year offset.
    pool: Vec<Vec<Vec<usize>>>,
}

fn ring_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

impl Generator<'_> {
    fn year_slot(&self, year: i32) -> usize {
        (year - self.cfg.first_year) as usize
    }

    fn adjacent(&mut self, community: usize) -> usize {
        let n = self.cfg.community_count;
        if n == 1 {
            community
        } else if self.rng.random_bool(0.5) {
            (community + 1) % n
        } else {
            (community + n - 1) % n
        }
    }

    /// Draw `count` co-authors near position `center` of the home community
    /// (or the same position of an adjacent community).
    fn coauthors(&mut self, home: usize, center: usize, count: usize, taken: &mut Vec<String>) {
        let target = taken.len() + count;
        let span = self.cfg.coauthor_span as i64;
        let mut attempts = 0;
        while taken.len() < target && attempts < 100 * count.max(1) {
            attempts += 1;
            let community = if self.rng.random_bool(self.cfg.inter_community_edge_prob) {
                self.adjacent(home)
            } else {
                home
            };
            let size = self.members[community].len() as i64;
            let offset = self.rng.random_range(-span..=span);
            let pos = (center as i64 + offset).rem_euclid(size) as usize;
            let author = self.members[community][pos].clone();
            if !taken.contains(&author) {
                taken.push(author);
            }
        }
    }

    /// A background paper from `community` published within the lookback.
    fn background_reference(&mut self, community: usize, year: i32) -> Option<usize> {
        let earliest = (year - CITATION_LOOKBACK_YEARS).max(self.cfg.first_year);
        if earliest >= year {
            return None;
        }
        let y = self.rng.random_range(earliest..year);
        let slot = self.year_slot(y);
        self.pool[community][slot].choose(&mut self.rng).copied()
    }

    fn archetype_reference(&mut self, group: &[Archetype], eligible: &[usize]) -> Option<usize> {
        let &who = eligible.choose(&mut self.rng)?;
        group[who].papers.choose(&mut self.rng).copied()
    }

    fn push(&mut self, year: i32, author_ids: Vec<String>, refs: Vec<usize>) -> usize {
        let idx = self.records.len();
        let reference_ids = refs
            .iter()
            .map(|&r| self.records[r].paper_id.clone())
            .collect();
        self.records.push(PaperRecord {
            paper_id: format!("p{idx:07}"),
            year,
            author_ids,
            reference_ids,
        });
        idx
    }

    fn author_count(&mut self) -> usize {
        self.rng
            .random_range(self.cfg.min_authors_per_paper..=self.cfg.max_authors_per_paper)
    }
}

/// Generate a corpus. Identical configs produce identical output.
pub fn generate_corpus(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let c = cfg.community_count;
    let years = (cfg.last_year - cfg.first_year + 1) as usize;
    let mut members = vec![Vec::new(); c];
    for i in 0..cfg.n_background_authors {
        members[i % c].push(format!("bg{i:05}"));
    }
    let mut gen = Generator {
        cfg,
        rng: rng::substream(cfg.seed, "synth-corpus", 0),
        records: Vec::new(),
        members,
        pool: vec![vec![Vec::new(); years]; c],
    };
    let mut hps: Vec<Archetype> = (0..cfg.hp_profile.count)
        .map(|i| Archetype {
            id: format!("hp{i:03}"),
            home: i % c,
            center: (i * 41) % (cfg.n_background_authors / c),
            papers: Vec::new(),
        })
        .collect();
    let mut tas: Vec<Archetype> = (0..cfg.ta_profile.count)
        .map(|i| Archetype {
            id: format!("ta{i:03}"),
            home: (i * 3 + c / 2) % c,
            center: (i * 41) % (cfg.n_background_authors / c),
            papers: Vec::new(),
        })
        .collect();

    // Archetypes that may be cited from each community.
    let eligible = |group: &[Archetype], radius: usize, community: usize| -> Vec<usize> {
        group
            .iter()
            .enumerate()
            .filter(|(_, a)| {
                let d = ring_distance(a.home, community, c);
                if radius == 0 {
                    d == 0
                } else {
                    (1..=radius).contains(&d)
                }
            })
            .map(|(i, _)| i)
            .collect()
    };
    let hp_eligible: Vec<Vec<usize>> = (0..c)
        .map(|k| eligible(&hps, cfg.hp_profile.citation_radius, k))
        .collect();
    let ta_eligible: Vec<Vec<usize>> = (0..c)
        .map(|k| eligible(&tas, cfg.ta_profile.citation_radius, k))
        .collect();

    for year in cfg.first_year..=cfg.last_year {
        let slot = gen.year_slot(year);
        let mut new_background = vec![Vec::new(); c];
        let mut new_hp = vec![Vec::new(); hps.len()];
        let mut new_ta = vec![Vec::new(); tas.len()];

        for i in 0..cfg.background_papers_per_year {
            let community = i % c;
            let n_authors = gen.author_count();
            let center = gen.rng.random_range(0..gen.members[community].len());
            let mut authors = vec![gen.members[community][center].clone()];
            gen.coauthors(community, center, n_authors - 1, &mut authors);

            let mut refs = Vec::with_capacity(cfg.references_per_paper);
            let mut seen = HashSet::new();
            for _ in 0..cfg.references_per_paper {
                let u: f64 = gen.rng.random();
                let target = if u < cfg.ta_profile.citation_rate {
                    gen.archetype_reference(&tas, &ta_eligible[community])
                } else if u < cfg.ta_profile.citation_rate + cfg.hp_profile.citation_rate {
                    gen.archetype_reference(&hps, &hp_eligible[community])
                } else {
                    let source = if gen.rng.random_bool(cfg.cross_community_citation_prob) && c > 1
                    {
                        let offset = gen.rng.random_range(1..c);
                        (community + offset) % c
                    } else {
                        community
                    };
                    gen.background_reference(source, year)
                };
                if let Some(t) = target {
                    if seen.insert(t) {
                        refs.push(t);
                    }
                }
            }
            let idx = gen.push(year, authors, refs);
            new_background[community].push(idx);
        }

        for (h, hp) in hps.iter().enumerate() {
            for _ in 0..cfg.hp_profile.papers_per_year {
                let n_authors = gen.author_count();
                let mut authors = vec![hp.id.clone()];
                gen.coauthors(hp.home, hp.center, n_authors - 1, &mut authors);
                let mut refs = Vec::new();
                let mut seen = HashSet::new();
                for _ in 0..cfg.references_per_paper {
                    let target = if gen.rng.random_bool(cfg.hp_self_citation_prob) {
                        hp.papers.choose(&mut gen.rng).copied()
                    } else {
                        gen.background_reference(hp.home, year)
                    };
                    if let Some(t) = target {
                        if seen.insert(t) {
                            refs.push(t);
                        }
                    }
                }
                let idx = gen.push(year, authors, refs);
                new_hp[h].push(idx);
            }
        }

        for (t, ta) in tas.iter().enumerate() {
            for _ in 0..cfg.ta_profile.papers_per_year {
                let n_authors = gen.author_count();
                let mut authors = vec![ta.id.clone()];
                gen.coauthors(ta.home, ta.center, n_authors - 1, &mut authors);
                let mut refs = Vec::new();
                let mut seen = HashSet::new();
                for _ in 0..cfg.references_per_paper {
                    if let Some(target) = gen.background_reference(ta.home, year) {
                        if seen.insert(target) {
                            refs.push(target);
                        }
                    }
                }
                let idx = gen.push(year, authors, refs);
                new_ta[t].push(idx);
            }
        }

        // Papers become citable from the following year on.
        for (k, papers) in new_background.into_iter().enumerate() {
            gen.pool[k][slot] = papers;
        }
        for (hp, papers) in hps.iter_mut().zip(new_hp) {
            hp.papers.extend(papers);
        }
        for (ta, papers) in tas.iter_mut().zip(new_ta) {
            ta.papers.extend(papers);
        }
    }

    Ok(SynthCorpus {
        records: gen.records,
        hp_authors: hps.into_iter().map(|a| a.id).collect(),
        ta_authors: tas.into_iter().map(|a| a.id).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub seed: u64,
    pub n_scholars: usize,
    /// Share of scholars following the breakout archetype.
    pub breakout_fraction: f64,
    /// Flagged scholars drawn from the breakout archetype.
    pub flagged_breakout: usize,
    /// Flagged scholars drawn from the background.
    pub flagged_background: usize,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            seed: 42,
            n_scholars: 2_000,
            breakout_fraction: 0.05,
            flagged_breakout: 20,
            flagged_background: 15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTrajectory {
    pub author_id: String,
    /// Cumulative index at career years 1..=10.
    pub series: Vec<f64>,
    pub breakout: bool,
    pub flagged: bool,
}

/// Cumulative career series for a background population and a breakout
/// minority with steeper growth, late acceleration and an earlier start.
pub fn generate_trajectories(cfg: &TrajectoryConfig) -> Result<Vec<SyntheticTrajectory>> {
    if !(0.0..=1.0).contains(&cfg.breakout_fraction) {
        return Err(Error::InvalidParameter(
            "breakout_fraction must lie in [0, 1]".into(),
        ));
    }
    let n_breakout = (cfg.n_scholars as f64 * cfg.breakout_fraction).round() as usize;
    let n_background = cfg.n_scholars - n_breakout;
    if cfg.flagged_breakout > n_breakout || cfg.flagged_background > n_background {
        return Err(Error::InvalidParameter(
            "more flagged scholars than archetype members".into(),
        ));
    }
    let mut rng = rng::substream(cfg.seed, "synth-trajectories", 0);
    let noise = LogNormal::new(0.0, 0.3).expect("valid lognormal");

    let mut out = Vec::with_capacity(cfg.n_scholars);
    for i in 0..cfg.n_scholars {
        let breakout = i < n_breakout;
        let (start, rate, ramp): (usize, f64, fn(usize) -> f64) = if breakout {
            let start = if rng.random_bool(0.94) { 1 } else { 2 };
            (start, rng.random_range(4.0..9.0), |k| {
                if k <= 5 {
                    1.0
                } else {
                    1.5 + 0.8 * (k - 5) as f64
                }
            })
        } else {
            let u: f64 = rng.random();
            let start = if u < 0.55 {
                1
            } else if u < 0.85 {
                2
            } else {
                3
            };
            (start, rng.random_range(0.8..2.4), |k| 1.0 + 0.12 * k as f64)
        };
        let mut total = 0.0;
        let series = (1..=SERIES_LEN)
            .map(|k| {
                if k >= start {
                    total += rate * ramp(k) * noise.sample(&mut rng);
                }
                total
            })
            .collect();
        out.push(SyntheticTrajectory {
            author_id: if breakout {
                format!("bk{i:05}")
            } else {
                format!("bg{i:05}")
            },
            series,
            breakout,
            flagged: (breakout && i < cfg.flagged_breakout)
                || (!breakout && i < n_breakout + cfg.flagged_background),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            last_year: 2004,
            n_background_authors: 200,
            background_papers_per_year: 60,
            hp_profile: ArchetypeProfile {
                count: 1,
                papers_per_year: 80,
                citation_radius: 0,
                citation_rate: 0.02,
            },
            ta_profile: ArchetypeProfile {
                count: 1,
                papers_per_year: 2,
                citation_radius: 4,
                citation_rate: 0.05,
            },
            ..SynthConfig::default()
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_corpus(&small()).unwrap();
        let b = generate_corpus(&small()).unwrap();
        assert_eq!(a, b);
        let other = generate_corpus(&SynthConfig {
            seed: 43,
            ..small()
        })
        .unwrap();
        assert_ne!(a.records, other.records);
    }

    #[test]
    fn hyperprolific_output_volume() {
        let cfg = SynthConfig {
            first_year: 2000,
            last_year: 2002,
            ..small()
        };
        let corpus = generate_corpus(&cfg).unwrap();
        let hp = &corpus.hp_authors[0];
        let np = corpus
            .records
            .iter()
            .filter(|r| r.author_ids.contains(hp))
            .count();
        assert!(np >= 240, "np = {np}");
    }

    #[test]
    fn infeasible_configs_are_rejected() {
        assert!(generate_corpus(&SynthConfig {
            community_count: 0,
            ..small()
        })
        .is_err());
        assert!(generate_corpus(&SynthConfig {
            inter_community_edge_prob: 1.5,
            ..small()
        })
        .is_err());
        let mut cfg = small();
        cfg.hp_profile.papers_per_year = 10;
        assert!(generate_corpus(&cfg).is_err());
    }

    #[test]
    fn ring_distance_wraps() {
        assert_eq!(ring_distance(0, 7, 8), 1);
        assert_eq!(ring_distance(1, 5, 8), 4);
    }

    #[test]
    fn trajectories_shape() {
        let cfg = TrajectoryConfig::default();
        let ts = generate_trajectories(&cfg).unwrap();
        assert_eq!(ts.len(), 2_000);
        assert_eq!(ts.iter().filter(|t| t.breakout).count(), 100);
        assert_eq!(ts.iter().filter(|t| t.flagged).count(), 35);
        assert_eq!(ts.iter().filter(|t| t.flagged && t.breakout).count(), 20);
        for t in &ts {
            assert!(t.series.windows(2).all(|w| w[1] >= w[0]));
        }
        assert_eq!(ts, generate_trajectories(&cfg).unwrap());
    }
}
