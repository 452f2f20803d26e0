//! `FUBIF1` model files.
//!
//! A line-oriented text format. Every float is written in Rust's shortest
//! round-trip scientific notation, so a reloaded forest reproduces scores
//! bit for bit.
//!
//! ```text
//! FUBIF1
//! dim <d>
//! n_trees <N>
//! subsample_size <requested ψ>
//! subsample_used <effective ψ>
//! max_depth auto | <n>
//! family <if|eif|hif|ellipse|hyper|para|quad|nn|sine>
//! quad_lambda <f64>
//! nn_hidden_widths - | <w1,w2,...>
//! threshold uniform | normal
//! eta <f64>
//! seed <u64>
//! max_resample_attempts <n>
//! tree <index> seed <u64> samples <m> nodes <k>
//! x <d floats>                                      (m sample rows)
//! leaf <size>                                       (k node lines, arena order,
//! node <size> <left> <right> <threshold> <family> <params>   node 0 is the root)
//! ...
//! end
//! ```
//!
//! Node parameters by family: `if` the 0-based feature index; `eif` the
//! normal (d); `hif` the center (d); `ellipse`/`hyper` both foci (2d);
//! `para` focus then normal (2d); `quad` the matrix `A` row-major then the
//! linear term (d² + d); `nn` the layer count, then per layer
//! `<in> <out> <weights row-major> <bias>`; `sine` nothing.

use std::fmt::Write as _;
use std::path::Path;
use std::str::{FromStr, SplitWhitespace};

use crate::error::{Error, Result};
use crate::forest::{Forest, ForestConfig, IsolationTree, MaxDepth, Node};
use crate::points::Points;
use crate::splitting::{Dense, FamilyKind, Mlp, SplitFamily, SplitFunction, SplitInstance};
use crate::threshold::ThresholdKind;

pub const MAGIC: &str = "FUBIF1";

fn push_floats(out: &mut String, values: &[f64]) {
    for v in values {
        let _ = write!(out, " {v:e}");
    }
}

fn write_function(out: &mut String, f: &SplitFunction) {
    out.push(' ');
    out.push_str(f.kind().name());
    match f {
        SplitFunction::Axis { feature, .. } => {
            let _ = write!(out, " {feature}");
        }
        SplitFunction::Hyperplane { normal } => push_floats(out, normal),
        SplitFunction::Sphere { center } => push_floats(out, center),
        SplitFunction::Ellipse { focus1, focus2 } | SplitFunction::Hyperbola { focus1, focus2 } => {
            push_floats(out, focus1);
            push_floats(out, focus2);
        }
        SplitFunction::Parabola { focus, normal } => {
            push_floats(out, focus);
            push_floats(out, normal);
        }
        SplitFunction::Quadric { matrix, linear } => {
            push_floats(out, matrix);
            push_floats(out, linear);
        }
        SplitFunction::Network(net) => {
            let _ = write!(out, " {}", net.layers.len());
            for layer in &net.layers {
                let _ = write!(out, " {} {}", layer.in_dim, layer.out_dim);
                push_floats(out, &layer.weights);
                push_floats(out, &layer.bias);
            }
        }
        SplitFunction::Sine => {}
    }
}

/// Serializes a forest to the `FUBIF1` text format.
pub fn to_string(forest: &Forest) -> String {
    let c = &forest.config;
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "dim {}", forest.dim);
    let _ = writeln!(out, "n_trees {}", c.n_trees);
    let _ = writeln!(out, "subsample_size {}", c.subsample_size);
    let _ = writeln!(out, "subsample_used {}", forest.subsample_size);
    match c.max_depth {
        MaxDepth::Auto => out.push_str("max_depth auto\n"),
        MaxDepth::Limit(d) => {
            let _ = writeln!(out, "max_depth {d}");
        }
    }
    let _ = writeln!(out, "family {}", c.family.kind.name());
    let _ = writeln!(out, "quad_lambda {:e}", c.family.quad_lambda);
    if c.family.nn_hidden_widths.is_empty() {
        out.push_str("nn_hidden_widths -\n");
    } else {
        let widths: Vec<String> = c.family.nn_hidden_widths.iter().map(|w| w.to_string()).collect();
        let _ = writeln!(out, "nn_hidden_widths {}", widths.join(","));
    }
    let _ = writeln!(out, "threshold {}", c.threshold.name());
    let _ = writeln!(out, "eta {:e}", c.eta);
    let _ = writeln!(out, "seed {}", c.seed);
    let _ = writeln!(out, "max_resample_attempts {}", c.max_resample_attempts);
    for (t, tree) in forest.trees.iter().enumerate() {
        let _ = writeln!(
            out,
            "tree {t} seed {} samples {} nodes {}",
            tree.seed,
            tree.sample.len(),
            tree.nodes.len()
        );
        for row in tree.sample.rows() {
            out.push('x');
            push_floats(&mut out, row);
            out.push('\n');
        }
        for node in &tree.nodes {
            match node {
                Node::Leaf { size } => {
                    let _ = writeln!(out, "leaf {size}");
                }
                Node::Internal {
                    split,
                    left,
                    right,
                    size,
                } => {
                    let _ = write!(out, "node {size} {left} {right} {:e}", split.threshold);
                    write_function(&mut out, &split.function);
                    out.push('\n');
                }
            }
        }
    }
    out.push_str("end\n");
    out
}

pub fn save(forest: &Forest, path: impl AsRef<Path>) -> Result<()> {
    crate::atomic::write(path.as_ref(), to_string(forest).as_bytes())
}

pub fn load(path: impl AsRef<Path>) -> Result<Forest> {
    from_str(&std::fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

struct Tokens<'a> {
    it: SplitWhitespace<'a>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<Tokens<'a>> {
        loop {
            let (i, text) = self.inner.next().ok_or(Error::Model {
                line: self.line + 1,
                message: "unexpected end of file".into(),
            })?;
            self.line = i + 1;
            if !text.trim().is_empty() {
                return Ok(Tokens {
                    it: text.split_whitespace(),
                    line: self.line,
                });
            }
        }
    }

    /// Reads a `key value` line and returns the value token.
    fn field(&mut self, key: &str) -> Result<String> {
        let mut t = self.next()?;
        t.expect(key)?;
        let v = t.word()?.to_string();
        t.finish()?;
        Ok(v)
    }
}

impl<'a> Tokens<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Model {
            line: self.line,
            message: message.into(),
        }
    }

    fn word(&mut self) -> Result<&'a str> {
        self.it.next().ok_or_else(|| self.err("missing field"))
    }

    fn expect(&mut self, key: &str) -> Result<()> {
        let w = self.word()?;
        if w == key {
            Ok(())
        } else {
            Err(self.err(format!("expected `{key}`, found `{w}`")))
        }
    }

    fn parse<T: FromStr>(&mut self) -> Result<T> {
        let w = self.word()?;
        w.parse().map_err(|_| self.err(format!("cannot parse `{w}`")))
    }

    fn floats(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.parse()).collect()
    }

    fn finish(&mut self) -> Result<()> {
        match self.it.next() {
            None => Ok(()),
            Some(w) => Err(self.err(format!("unexpected trailing field `{w}`"))),
        }
    }
}

fn parse_value<T: FromStr>(lines: &Lines<'_>, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Model {
        line: lines.line,
        message: format!("invalid {key} `{v}`"),
    })
}

fn read_function(t: &mut Tokens<'_>, dim: usize) -> Result<SplitFunction> {
    let kind: FamilyKind = t.word()?.parse().map_err(|e: Error| t.err(e.to_string()))?;
    let f = match kind {
        FamilyKind::Axis => {
            let feature: usize = t.parse()?;
            if feature >= dim {
                return Err(t.err(format!("feature {feature} out of range")));
            }
            SplitFunction::Axis { feature, dim }
        }
        FamilyKind::Hyperplane => SplitFunction::Hyperplane { normal: t.floats(dim)? },
        FamilyKind::Sphere => SplitFunction::Sphere { center: t.floats(dim)? },
        FamilyKind::Ellipse => SplitFunction::Ellipse {
            focus1: t.floats(dim)?,
            focus2: t.floats(dim)?,
        },
        FamilyKind::Hyperbola => SplitFunction::Hyperbola {
            focus1: t.floats(dim)?,
            focus2: t.floats(dim)?,
        },
        FamilyKind::Parabola => SplitFunction::Parabola {
            focus: t.floats(dim)?,
            normal: t.floats(dim)?,
        },
        FamilyKind::Quadric => SplitFunction::Quadric {
            matrix: t.floats(dim * dim)?,
            linear: t.floats(dim)?,
        },
        FamilyKind::Network => {
            let n_layers: usize = t.parse()?;
            let mut layers = Vec::with_capacity(n_layers);
            let mut expected_in = dim;
            for _ in 0..n_layers {
                let in_dim: usize = t.parse()?;
                let out_dim: usize = t.parse()?;
                if in_dim != expected_in || out_dim == 0 {
                    return Err(t.err("inconsistent network layer shapes"));
                }
                let weights = t.floats(in_dim * out_dim)?;
                let bias = t.floats(out_dim)?;
                layers.push(Dense {
                    in_dim,
                    out_dim,
                    weights,
                    bias,
                });
                expected_in = out_dim;
            }
            if n_layers == 0 || expected_in != 1 {
                return Err(t.err("network must end in a single output"));
            }
            SplitFunction::Network(Mlp { layers })
        }
        FamilyKind::Sine => {
            if dim != 2 {
                return Err(t.err("sine split in a model that is not 2-d"));
            }
            SplitFunction::Sine
        }
    };
    t.finish()?;
    Ok(f)
}

/// Parses a `FUBIF1` document.
pub fn from_str(text: &str) -> Result<Forest> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let mut t = lines.next()?;
    t.expect(MAGIC)?;
    t.finish()?;

    let dim: usize = {
        let v = lines.field("dim")?;
        parse_value(&lines, "dim", &v)?
    };
    macro_rules! field {
        ($key:literal) => {{
            let v = lines.field($key)?;
            parse_value(&lines, $key, &v)?
        }};
    }
    let n_trees: usize = field!("n_trees");
    let subsample_size: usize = field!("subsample_size");
    let subsample_used: usize = field!("subsample_used");
    let max_depth = match lines.field("max_depth")?.as_str() {
        "auto" => MaxDepth::Auto,
        v => MaxDepth::Limit(parse_value(&lines, "max_depth", v)?),
    };
    let kind: FamilyKind = field!("family");
    let quad_lambda: f64 = field!("quad_lambda");
    let nn_hidden_widths = match lines.field("nn_hidden_widths")?.as_str() {
        "-" => Vec::new(),
        v => v
            .split(',')
            .map(|w| parse_value(&lines, "nn_hidden_widths", w))
            .collect::<Result<Vec<usize>>>()?,
    };
    let threshold: ThresholdKind = field!("threshold");
    let eta: f64 = field!("eta");
    let seed: u64 = field!("seed");
    let max_resample_attempts: usize = field!("max_resample_attempts");
    let config = ForestConfig {
        n_trees,
        subsample_size,
        max_depth,
        family: SplitFamily {
            kind,
            quad_lambda,
            nn_hidden_widths,
        },
        threshold,
        eta,
        seed,
        max_resample_attempts,
    };

    let mut trees = Vec::with_capacity(n_trees);
    for t_index in 0..n_trees {
        let mut t = lines.next()?;
        t.expect("tree")?;
        let idx: usize = t.parse()?;
        if idx != t_index {
            return Err(t.err(format!("expected tree {t_index}, found {idx}")));
        }
        t.expect("seed")?;
        let tree_seed: u64 = t.parse()?;
        t.expect("samples")?;
        let n_samples: usize = t.parse()?;
        t.expect("nodes")?;
        let n_nodes: usize = t.parse()?;
        t.finish()?;
        if n_nodes == 0 {
            return Err(t.err("tree without nodes"));
        }

        let mut sample = Points::with_dim(dim);
        for _ in 0..n_samples {
            let mut t = lines.next()?;
            t.expect("x")?;
            let row = t.floats(dim)?;
            t.finish()?;
            sample.push(&row)?;
        }

        let mut nodes = Vec::with_capacity(n_nodes);
        for id in 0..n_nodes {
            let mut t = lines.next()?;
            let node = match t.word()? {
                "leaf" => {
                    let size = t.parse()?;
                    t.finish()?;
                    Node::Leaf { size }
                }
                "node" => {
                    let size = t.parse()?;
                    let left: usize = t.parse()?;
                    let right: usize = t.parse()?;
                    if left <= id || right <= id || left >= n_nodes || right >= n_nodes {
                        return Err(t.err("child index out of range"));
                    }
                    let threshold = t.parse()?;
                    let function = read_function(&mut t, dim)?;
                    Node::Internal {
                        split: SplitInstance { function, threshold },
                        left,
                        right,
                        size,
                    }
                }
                other => return Err(t.err(format!("expected `leaf` or `node`, found `{other}`"))),
            };
            nodes.push(node);
        }
        let tree = IsolationTree {
            nodes,
            sample,
            seed: tree_seed,
        };
        if let Err(id) = tree.audit() {
            return Err(Error::Model {
                line: lines.line,
                message: format!("tree {t_index}: node {id} sizes do not add up"),
            });
        }
        trees.push(tree);
    }
    let mut t = lines.next()?;
    t.expect("end")?;
    t.finish()?;

    Ok(Forest {
        trees,
        config,
        subsample_size: subsample_used,
        dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_gaussian;

    #[test]
    fn every_family_round_trips_bitwise() {
        let data = generate_gaussian(120, 2, 3).points;
        for kind in FamilyKind::ALL {
            let config = ForestConfig {
                n_trees: 5,
                family: SplitFamily::new(kind),
                seed: 8,
                ..ForestConfig::default()
            };
            let forest = Forest::fit(&data, &config).unwrap();
            let text = to_string(&forest);
            let back = from_str(&text).unwrap();
            assert_eq!(back, forest, "{kind}");
            assert_eq!(to_string(&back), text);
            let a = forest.score_all(&data).unwrap();
            let b = back.score_all(&data).unwrap();
            assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(from_str("").is_err());
        assert!(from_str("FUBIF2\n").is_err());
        let data = generate_gaussian(50, 3, 1).points;
        let forest = Forest::fit(
            &data,
            &ForestConfig {
                n_trees: 2,
                ..ForestConfig::default()
            },
        )
        .unwrap();
        let text = to_string(&forest);
        let truncated = &text[..text.len() / 2];
        assert!(matches!(from_str(truncated), Err(Error::Model { .. })));
        let tampered = text.replacen("leaf 1", "leaf 7", 1);
        assert!(from_str(&tampered).is_err());
    }
}
