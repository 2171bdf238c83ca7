//! Random well-declared programs, built modes first.

use std::sync::Arc;

use cohere::decl::{Decl, Layout, View, ViewDecl};
use cohere::modes::{AccessMode, AnnotatedProgram, DeclBlock, ModeKind};
use cohere::overlap::{infer_overlap_closure, rewrite_program, OverlapRegistry};
use cohere::syntax::{name, Condition, Name, Site, Statement, Target};
use cohere::EffectKind;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenLimits {
    pub max_blocks: usize,
    pub max_body_depth: usize,
    pub max_vars: usize,
    pub max_buffer_len: usize,
    /// Most `while` loops in one body.
    pub max_loop_unroll: usize,
    pub allow_arrays: bool,
    pub allow_overlaps: bool,
}

impl Default for GenLimits {
    fn default() -> Self {
        GenLimits {
            max_blocks: 4,
            max_body_depth: 3,
            max_vars: 3,
            max_buffer_len: 6,
            max_loop_unroll: 1,
            allow_arrays: true,
            allow_overlaps: false,
        }
    }
}

impl GenLimits {
    pub fn scalars() -> Self {
        GenLimits {
            allow_arrays: false,
            ..Self::default()
        }
    }

    pub fn overlapping() -> Self {
        GenLimits {
            allow_overlaps: true,
            max_vars: 4,
            ..Self::default()
        }
    }

    fn clamped(self) -> Self {
        GenLimits {
            max_blocks: self.max_blocks.max(1),
            max_body_depth: self.max_body_depth.max(1),
            max_vars: self.max_vars.max(1),
            max_buffer_len: self.max_buffer_len.max(1),
            max_loop_unroll: self.max_loop_unroll.max(1),
            ..self
        }
    }
}

fn gen_layout(rng: &mut ChaCha8Rng, limits: &GenLimits) -> Layout {
    let n = rng.gen_range(1..=limits.max_vars);
    let mut decls = Vec::new();
    let mut arrays: Vec<(usize, usize)> = Vec::new();
    let shared_len = limits.max_buffer_len;
    if limits.allow_overlaps {
        decls.push(Decl::Buffer {
            name: name("buf"),
            len: shared_len,
        });
    }
    for i in 0..n {
        if !limits.allow_arrays || rng.gen_bool(0.35) {
            decls.push(Decl::Scalar(name(&format!("s{i}"))));
            continue;
        }
        let view = name(&format!("v{i}"));
        if limits.allow_overlaps {
            let (lo, hi) = match arrays.first() {
                // the second view always shares an element with the first
                Some(&(flo, fhi)) if arrays.len() == 1 => {
                    let lo = rng.gen_range(flo..=fhi);
                    (lo, rng.gen_range(lo..shared_len))
                }
                _ => {
                    let lo = rng.gen_range(0..shared_len);
                    (lo, rng.gen_range(lo..shared_len))
                }
            };
            arrays.push((lo, hi));
            decls.push(Decl::View {
                name: view,
                buffer: name("buf"),
                lo,
                hi,
            });
        } else {
            let len = rng.gen_range(1..=limits.max_buffer_len);
            let buffer = name(&format!("b{i}"));
            let lo = rng.gen_range(0..len);
            let hi = rng.gen_range(lo..len);
            decls.push(Decl::Buffer {
                name: buffer.clone(),
                len,
            });
            decls.push(Decl::View {
                name: view,
                buffer,
                lo,
                hi,
            });
        }
    }
    Layout::new(decls).expect("generated names are unique and ranges fit")
}

fn gen_modes(rng: &mut ChaCha8Rng, layout: &Layout) -> Vec<AccessMode> {
    let mut views: Vec<&View> = layout.views().iter().collect();
    views.shuffle(rng);
    let take = rng.gen_range(0..=views.len());
    views[..take]
        .iter()
        .map(|v| {
            let kind = *[ModeKind::R, ModeKind::W, ModeKind::RW]
                .choose(rng)
                .unwrap();
            let site = if rng.gen_bool(0.5) {
                Site::Local
            } else {
                Site::Remote
            };
            AccessMode::new(kind, site, v.name().clone())
        })
        .collect()
}

/// What a body may do with one view.
struct Access {
    site: Site,
    view: View,
    read: bool,
    write: bool,
}

impl Access {
    fn target(&self, rng: &mut ChaCha8Rng) -> Target {
        match &self.view {
            View::Scalar(n) => Target::Scalar(n.clone()),
            View::Array(a) => Target::Element {
                array: a.clone(),
                index: rng.gen_range(a.lo..=a.hi),
            },
        }
    }
}

struct BodyGen<'a> {
    rng: &'a mut ChaCha8Rng,
    accesses: &'a [Access],
    views: &'a [Name],
    loops_left: usize,
}

impl BodyGen<'_> {
    fn effect(&mut self) -> Statement {
        let candidates: Vec<(usize, EffectKind)> = self
            .accesses
            .iter()
            .enumerate()
            .flat_map(|(i, a)| {
                let r = a.read.then_some((i, EffectKind::Read));
                let w = a.write.then_some((i, EffectKind::Write));
                r.into_iter().chain(w)
            })
            .collect();
        let Some(&(i, kind)) = candidates.choose(self.rng) else {
            return Statement::Noop;
        };
        let a = &self.accesses[i];
        Statement::Effect {
            kind,
            site: a.site,
            target: a.target(self.rng),
        }
    }

    fn condition(&mut self) -> Condition {
        match self.rng.gen_range(0..6) {
            0 if !self.views.is_empty() => {
                Condition::IsValid(self.views.choose(self.rng).unwrap().clone())
            }
            1 if !self.views.is_empty() => {
                Condition::RemIsValid(self.views.choose(self.rng).unwrap().clone())
            }
            _ => Condition::Opaque(None),
        }
    }

    fn stmt(&mut self, depth: usize) -> Statement {
        if depth == 0 {
            return self.effect();
        }
        match self.rng.gen_range(0..10) {
            0..=5 => self.effect(),
            6..=7 => {
                let c = self.condition();
                let a = self.seq(depth - 1);
                let b = if self.rng.gen_bool(0.5) {
                    self.seq(depth - 1)
                } else {
                    Statement::Noop
                };
                Statement::if_(c, a, b)
            }
            8 if self.loops_left > 0 => {
                self.loops_left -= 1;
                let body = self.seq(depth - 1);
                Statement::while_(Condition::Opaque(None), body)
            }
            _ => self.seq(depth - 1),
        }
    }

    fn seq(&mut self, depth: usize) -> Statement {
        let n = self.rng.gen_range(0..=3);
        Statement::block((0..n).map(|_| self.stmt(depth)).collect::<Vec<_>>())
    }
}

/// Writes of every element of `view` at `site`, in random order.
fn full_write(rng: &mut ChaCha8Rng, view: &View, site: Site) -> Statement {
    let mut targets: Vec<Target> = match view {
        View::Scalar(n) => vec![Target::Scalar(n.clone())],
        View::Array(a) => a
            .range()
            .map(|index| Target::Element {
                array: a.clone(),
                index,
            })
            .collect(),
    };
    targets.shuffle(rng);
    Statement::block(targets.into_iter().map(|target| Statement::Effect {
        kind: EffectKind::Write,
        site,
        target,
    }))
}

/// Body honouring `closure`: reads only through reading entries, writes only
/// through declared writing entries, and every `W` entry written in full on
/// every path.
fn gen_body(
    rng: &mut ChaCha8Rng,
    layout: &Layout,
    closure: &[AccessMode],
    limits: &GenLimits,
) -> Statement {
    let accesses: Vec<Access> = closure
        .iter()
        .map(|m| Access {
            site: m.site,
            view: layout
                .view(&m.view)
                .expect("mode of a declared view")
                .clone(),
            read: m.kind.reads(),
            write: m.declared().is_some_and(|d| d.kind.writes()),
        })
        .collect();
    let views: Vec<Name> = layout.views().iter().map(|v| v.name().clone()).collect();
    let mut gen = BodyGen {
        rng,
        accesses: &accesses,
        views: &views,
        loops_left: limits.max_loop_unroll,
    };
    let mut parts = Vec::new();
    let n = gen.rng.gen_range(0..=3);
    for _ in 0..n {
        parts.push(gen.stmt(limits.max_body_depth));
    }
    for m in closure.iter().filter(|m| m.kind == ModeKind::W) {
        let view = layout.view(&m.view).unwrap();
        let chunk = if gen.rng.gen_bool(0.3) {
            let c = gen.condition();
            let a = full_write(gen.rng, view, m.site);
            let b = full_write(gen.rng, view, m.site);
            Statement::if_(c, a, b)
        } else {
            full_write(gen.rng, view, m.site)
        };
        let at = gen.rng.gen_range(0..=parts.len());
        parts.insert(at, chunk);
    }
    Statement::block(parts)
}

/// A deterministic function of `seed` that always passes
/// [`cohere::checker::check_program`].
pub fn gen_well_declared(seed: u64, limits: &GenLimits) -> AnnotatedProgram {
    let limits = limits.clamped();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = gen_layout(&mut rng, &limits);
    let registry: OverlapRegistry = OverlapRegistry::from_layout(&layout);
    let n = rng.gen_range(1..=limits.max_blocks);
    let mut blocks = Vec::with_capacity(n);
    for _ in 0..n {
        let (modes, closure) = loop {
            let modes = gen_modes(&mut rng, &layout);
            if let Ok(closure) = infer_overlap_closure(&modes, &layout, &registry) {
                break (modes, closure);
            }
        };
        let body = gen_body(&mut rng, &layout, &closure, &limits);
        blocks.push(DeclBlock::new(modes, body));
    }
    let p = AnnotatedProgram::new(layout, blocks).expect("modes name declared views once");
    rewrite_program(&p, &registry).expect("closures were checked per block")
}

/// Pairs of distinct array views of one buffer whose ranges intersect,
/// found by comparing every pair.
pub fn overlapping_pairs(layout: &Layout) -> Vec<(Name, Name)> {
    let arrays: Vec<&Arc<ViewDecl>> = layout.arrays().collect();
    let mut out = Vec::new();
    for (i, a) in arrays.iter().enumerate() {
        for b in &arrays[i + 1..] {
            let shared = a.range().any(|k| b.contains(k));
            if a.buffer == b.buffer && shared {
                out.push((a.view.clone(), b.view.clone()));
            }
        }
    }
    out
}
