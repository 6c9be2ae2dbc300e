//! Indented text form of a [`FeatureTree`], one node per line.
//!
//! ```text
//! #voltage-feature-tree v1
//! max_group_size 6
//! bins_per_range_feature 4
//! count_cap 4
//! recommended F1 F7
//! split F1
//!   bucket 0
//!     leaf a b
//!   bucket 1
//!     leaf c
//! ```

use std::fmt::Write as _;

use super::{FeatureTree, TreeNode};
use crate::glyphfeat::FeatureId;
use crate::{Error, Result};

pub const TREE_HEADER: &str = "#voltage-feature-tree v1";

impl FeatureTree {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{TREE_HEADER}");
        let _ = writeln!(out, "max_group_size {}", self.max_group_size);
        let _ = writeln!(out, "bins_per_range_feature {}", self.bins_per_range_feature);
        let _ = writeln!(out, "count_cap {}", self.count_cap);
        out.push_str("recommended");
        for f in &self.recommended_features {
            let _ = write!(out, " {f}");
        }
        out.push('\n');
        write_node(&self.root, 0, &mut out);
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty())
            .collect();
        let err = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        if lines.first().map(|l| l.1) != Some(TREE_HEADER) {
            return Err(err(1, "missing feature-tree header"));
        }
        let header = |i: usize, key: &str| -> Result<&str> {
            let (n, l) = lines.get(i).copied().ok_or_else(|| err(i + 1, "truncated header"))?;
            l.strip_prefix(key)
                .map(str::trim)
                .ok_or_else(|| err(n, &format!("expected {key:?}")))
        };
        let num = |s: &str, line: usize| -> Result<usize> {
            s.parse().map_err(|_| err(line, &format!("bad number {s:?}")))
        };
        let max_group_size = num(header(1, "max_group_size")?, 2)?;
        let bins_per_range_feature = num(header(2, "bins_per_range_feature")?, 3)? as u32;
        let count_cap = num(header(3, "count_cap")?, 4)? as u32;
        let recommended_features = header(4, "recommended")?
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<FeatureId>>>()?;
        let mut pos = 5;
        let root = read_node(&lines, &mut pos, 0)?;
        if pos != lines.len() {
            return Err(err(lines[pos].0, "trailing content"));
        }
        Ok(FeatureTree {
            root,
            recommended_features,
            max_group_size,
            bins_per_range_feature,
            count_cap,
        })
    }
}

fn write_node(n: &TreeNode, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match n {
        TreeNode::Leaf { labels } => {
            let _ = writeln!(out, "{pad}leaf {}", labels.join(" "));
        }
        TreeNode::Split { feature, children } => {
            let _ = writeln!(out, "{pad}split {feature}");
            for (bucket, child) in children {
                let _ = writeln!(out, "{pad}  bucket {bucket}");
                write_node(child, depth + 2, out);
            }
        }
    }
}

fn indent_of(l: &str) -> usize {
    l.len() - l.trim_start_matches(' ').len()
}

fn read_node(lines: &[(usize, &str)], pos: &mut usize, depth: usize) -> Result<TreeNode> {
    let (n, l) = *lines.get(*pos).ok_or(Error::Parse {
        line: lines.last().map_or(0, |x| x.0),
        msg: "expected a node".into(),
    })?;
    let err = |msg: &str| Error::Parse {
        line: n,
        msg: msg.into(),
    };
    if indent_of(l) != depth * 2 {
        return Err(err("unexpected indentation"));
    }
    *pos += 1;
    let body = l.trim();
    if let Some(rest) = body.strip_prefix("leaf") {
        let labels: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
        if labels.is_empty() {
            return Err(err("empty leaf"));
        }
        return Ok(TreeNode::Leaf { labels });
    }
    let feature: FeatureId = body
        .strip_prefix("split ")
        .ok_or_else(|| err("expected `split` or `leaf`"))?
        .trim()
        .parse()?;
    let mut children = Vec::new();
    while let Some(&(cn, cl)) = lines.get(*pos) {
        if indent_of(cl) != depth * 2 + 2 {
            break;
        }
        let bucket = cl
            .trim()
            .strip_prefix("bucket ")
            .and_then(|b| b.trim().parse().ok())
            .ok_or(Error::Parse {
                line: cn,
                msg: "expected `bucket N`".into(),
            })?;
        *pos += 1;
        children.push((bucket, read_node(lines, pos, depth + 2)?));
    }
    if children.is_empty() {
        return Err(err("split without children"));
    }
    Ok(TreeNode::Split { feature, children })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfrs::fixtures::{script_fixture, ReferenceScript};
    use crate::gfrs::{recommend, GfrsConfig};

    #[test]
    fn round_trip() {
        let tree = recommend(&script_fixture(ReferenceScript::Takri), &GfrsConfig::default()).unwrap();
        let text = tree.to_text();
        assert!(text.starts_with(TREE_HEADER));
        assert_eq!(FeatureTree::from_text(&text).unwrap(), tree);
    }

    #[test]
    fn rejects_malformed() {
        assert!(FeatureTree::from_text("").is_err());
        let good = "#voltage-feature-tree v1\nmax_group_size 6\nbins_per_range_feature 4\ncount_cap 4\nrecommended F1\nsplit F1\n  bucket 0\n    leaf a\n  bucket 1\n    leaf b\n";
        assert!(FeatureTree::from_text(good).is_ok());
        assert!(FeatureTree::from_text(&good.replace("    leaf a", "   leaf a")).is_err());
        assert!(FeatureTree::from_text(&good.replace("split F1", "split F99")).is_err());
        assert!(FeatureTree::from_text(&format!("{good}leaf c\n")).is_err());
    }
}
