//! Two-pass connected-component labelling with a union-find forest.

use crate::raster::{BinaryImage, Rect};

/// One 8-connected ink component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub rect: Rect,
    /// Pixels in raster order.
    pub pixels: Vec<(usize, usize)>,
}

impl Component {
    /// First pixel in raster order; components are sorted by it.
    pub fn anchor(&self) -> (usize, usize) {
        self.pixels[0]
    }

    pub fn centroid(&self) -> (f64, f64) {
        let n = self.pixels.len() as f64;
        let (sx, sy) = self
            .pixels
            .iter()
            .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x as f64, sy + y as f64));
        (sx / n, sy / n)
    }

    /// The component alone, cropped to its bounding box.
    pub fn to_image(&self) -> BinaryImage {
        let mut img = BinaryImage::new(self.rect.w, self.rect.h);
        for &(x, y) in &self.pixels {
            img.set(x - self.rect.x, y - self.rect.y, true);
        }
        img
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        Self { parent: Vec::new() }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut i: u32) -> u32 {
        while self.parent[i as usize] != i {
            let grand = self.parent[self.parent[i as usize] as usize];
            self.parent[i as usize] = grand;
            i = grand;
        }
        i
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        // Smaller id wins so roots follow first appearance.
        if ra < rb {
            self.parent[rb as usize] = ra;
        } else if rb < ra {
            self.parent[ra as usize] = rb;
        }
    }
}

/// 8-connected components ordered by their top-most, then left-most pixel.
pub fn connected_components(img: &BinaryImage) -> Vec<Component> {
    let (w, h) = (img.width(), img.height());
    const NONE: u32 = u32::MAX;
    let mut labels = vec![NONE; w * h];
    let mut sets = DisjointSet::new();

    for y in 0..h {
        for x in 0..w {
            if !img.get(x, y) {
                continue;
            }
            // Already-visited neighbours: W, NW, N, NE.
            let mut current = NONE;
            let prior = [(-1isize, 0isize), (-1, -1), (0, -1), (1, -1)];
            for (dx, dy) in prior {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx as usize >= w {
                    continue;
                }
                let l = labels[ny as usize * w + nx as usize];
                if l == NONE {
                    continue;
                }
                if current == NONE {
                    current = l;
                } else if l != current {
                    sets.union(current, l);
                }
            }
            if current == NONE {
                current = sets.make();
            }
            labels[y * w + x] = current;
        }
    }

    let mut slot_of_root: Vec<u32> = vec![NONE; sets.parent.len()];
    let mut out: Vec<Component> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let l = labels[y * w + x];
            if l == NONE {
                continue;
            }
            let root = sets.find(l) as usize;
            if slot_of_root[root] == NONE {
                slot_of_root[root] = out.len() as u32;
                out.push(Component {
                    rect: Rect::new(x, y, 1, 1),
                    pixels: Vec::new(),
                });
            }
            let c = &mut out[slot_of_root[root] as usize];
            c.rect = c.rect.union(&Rect::new(x, y, 1, 1));
            c.pixels.push((x, y));
        }
    }
    out
}
