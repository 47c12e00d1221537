use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{PropInstance, PropKind, SpawnRules, SpeciesTable, TreeInstance, MAX_LEAN};
use crate::error::Result;
use crate::geom::Vec3;
use crate::seed::{self, SimRng};
use crate::terrain::TerrainGrid;

/// Dart-throwing tree placement under altitude, slope, spacing and
/// neighbour-count rules. Trees are numbered from 1 in acceptance order.
pub fn place_trees(
    grid: &TerrainGrid,
    rules: &SpawnRules,
    species_table: &SpeciesTable,
    rng_seed: u64,
) -> Result<Vec<TreeInstance>> {
    rules.validate()?;
    species_table.validate()?;
    let target = (rules.target_density * grid.area_m2() / 10_000.0).floor() as usize;
    let budget = 64 * target;
    let c = grid.cell_size;
    let (x_hi, y_hi) = (grid.extent_x() - c, grid.extent_y() - c);
    let mut trees: Vec<TreeInstance> = Vec::with_capacity(target);
    if target == 0 || x_hi <= c || y_hi <= c {
        return Ok(trees);
    }

    let mut rng = seed::rng(rng_seed);
    let mut index = SpatialIndex::new(grid, rules.min_spacing.max(rules.neighbor_radius));
    let spacing2 = rules.min_spacing * rules.min_spacing;
    let neighbor2 = rules.neighbor_radius * rules.neighbor_radius;

    for _ in 0..budget {
        if trees.len() >= target {
            break;
        }
        let x = rng.gen_range(c..=x_hi);
        let y = rng.gen_range(c..=y_hi);
        let z = grid.sample_height(x, y)?;
        if z < rules.altitude_range[0] || z > rules.altitude_range[1] {
            continue;
        }
        if grid.slope_at(x, y)? > rules.max_slope {
            continue;
        }
        let mut too_close = false;
        let mut neighbors = 0u32;
        index.for_each_near(x, y, |k| {
            let p = trees[k].base_position;
            let d2 = (p.x - x) * (p.x - x) + (p.y - y) * (p.y - y);
            if d2 < spacing2 {
                too_close = true;
            }
            if d2 <= neighbor2 {
                neighbors += 1;
            }
        });
        if too_close || neighbors > rules.max_neighbors {
            continue;
        }
        let id = trees.len() as u32 + 1;
        trees.push(draw_tree(&mut rng, species_table, id, Vec3::new(x, y, z)));
        index.insert(x, y, trees.len() - 1);
    }
    Ok(trees)
}

fn draw_tree(rng: &mut SimRng, table: &SpeciesTable, id: u32, base: Vec3) -> TreeInstance {
    let species = rng.gen_range(0..table.len());
    let t = table.get(species);
    let trunk_height = rng.gen_range(t.trunk_height[0]..=t.trunk_height[1]);
    let dbh = rng.gen_range(t.dbh[0]..=t.dbh[1]);
    let heading = rng.gen_range(0.0..TAU);
    let u: f64 = rng.gen();
    let crown_radius = rng.gen_range(t.crown_radius[0]..=t.crown_radius[1]);
    let crown_fraction = rng.gen_range(t.crown_fraction[0]..=t.crown_fraction[1]);
    TreeInstance {
        id,
        base_position: base,
        species,
        trunk_height,
        dbh,
        lean_axis: [heading.cos(), heading.sin()],
        // most trees stand nearly upright
        lean_angle: MAX_LEAN * u * u * u,
        crown_radius,
        crown_height: crown_fraction * trunk_height,
        color_variation: rng.gen(),
    }
}

/// Understorey densities per kind, instances per hectare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UnderstoreyDensity {
    pub grass: f64,
    pub stump: f64,
    pub scrub: f64,
    pub branch: f64,
}

impl Default for UnderstoreyDensity {
    fn default() -> Self {
        UnderstoreyDensity {
            grass: 1200.0,
            stump: 30.0,
            scrub: 250.0,
            branch: 150.0,
        }
    }
}

impl UnderstoreyDensity {
    pub fn zero() -> Self {
        UnderstoreyDensity {
            grass: 0.0,
            stump: 0.0,
            scrub: 0.0,
            branch: 0.0,
        }
    }

    pub fn get(&self, kind: PropKind) -> f64 {
        match kind {
            PropKind::Grass => self.grass,
            PropKind::Stump => self.stump,
            PropKind::Scrub => self.scrub,
            PropKind::Branch => self.branch,
        }
    }
}

/// Uniform prop scatter, `floor(density * area)` instances of each kind.
pub fn place_understorey(
    grid: &TerrainGrid,
    density: &UnderstoreyDensity,
    rng_seed: u64,
) -> Result<Vec<PropInstance>> {
    let area_ha = grid.area_m2() / 10_000.0;
    let mut rng = seed::rng(rng_seed);
    let mut props = Vec::new();
    for kind in PropKind::ALL {
        let count = (density.get(kind).max(0.0) * area_ha).floor() as usize;
        let (lo, hi) = match kind {
            PropKind::Grass => (0.6, 1.4),
            PropKind::Stump => (0.7, 1.3),
            PropKind::Scrub => (0.5, 1.5),
            PropKind::Branch => (0.6, 1.6),
        };
        for _ in 0..count {
            let x = rng.gen_range(0.0..=grid.extent_x());
            let y = rng.gen_range(0.0..=grid.extent_y());
            let z = grid.sample_height(x, y)?;
            props.push(PropInstance {
                kind,
                position: Vec3::new(x, y, z),
                scale: rng.gen_range(lo..hi),
                yaw: rng.gen_range(0.0..TAU),
            });
        }
    }
    Ok(props)
}

/// Uniform bucket grid over the terrain for neighbourhood queries.
struct SpatialIndex {
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<usize>>,
}

impl SpatialIndex {
    fn new(grid: &TerrainGrid, reach: f64) -> Self {
        let cell = reach.max(0.5);
        let cols = (grid.extent_x() / cell).floor() as usize + 1;
        let rows = (grid.extent_y() / cell).floor() as usize + 1;
        SpatialIndex {
            cell,
            cols,
            rows,
            buckets: vec![Vec::new(); cols * rows],
        }
    }

    fn bucket(&self, x: f64, y: f64) -> (usize, usize) {
        let cx = ((x / self.cell).floor().max(0.0) as usize).min(self.cols - 1);
        let cy = ((y / self.cell).floor().max(0.0) as usize).min(self.rows - 1);
        (cx, cy)
    }

    fn insert(&mut self, x: f64, y: f64, item: usize) {
        let (cx, cy) = self.bucket(x, y);
        self.buckets[cy * self.cols + cx].push(item);
    }

    fn for_each_near(&self, x: f64, y: f64, mut f: impl FnMut(usize)) {
        let (cx, cy) = self.bucket(x, y);
        for by in cy.saturating_sub(1)..=(cy + 1).min(self.rows - 1) {
            for bx in cx.saturating_sub(1)..=(cx + 1).min(self.cols - 1) {
                self.buckets[by * self.cols + bx].iter().for_each(|&k| f(k));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::{generate_heightmap, HeightmapParams};

    fn rough() -> TerrainGrid {
        generate_heightmap(
            4,
            &HeightmapParams {
                size_m: 60.0,
                cell_size: 0.5,
                amplitude: 8.0,
                octaves: 4,
                base_frequency: 1.0 / 10.0,
            },
        )
        .unwrap()
    }

    fn permissive(density: f64) -> SpawnRules {
        SpawnRules {
            altitude_range: [-100.0, 100.0],
            max_slope: 1.5,
            neighbor_radius: 4.0,
            max_neighbors: 50,
            target_density: density,
            min_spacing: 1.2,
        }
    }

    #[test]
    fn zero_max_slope_on_rough_terrain_places_nothing() {
        let g = rough();
        let rules = SpawnRules {
            max_slope: 0.0,
            ..permissive(400.0)
        };
        let trees = place_trees(&g, &rules, &SpeciesTable::default(), 1).unwrap();
        assert!(trees.is_empty());
    }

    #[test]
    fn every_tree_satisfies_every_rule() {
        let g = rough();
        let rules = SpawnRules {
            altitude_range: [-3.0, 4.0],
            max_slope: 0.5,
            neighbor_radius: 4.0,
            max_neighbors: 3,
            target_density: 600.0,
            min_spacing: 1.5,
        };
        let trees = place_trees(&g, &rules, &SpeciesTable::default(), 77).unwrap();
        assert!(!trees.is_empty());
        for (k, t) in trees.iter().enumerate() {
            let p = t.base_position;
            assert_eq!(t.id as usize, k + 1);
            assert_eq!(p.z.to_bits(), g.sample_height(p.x, p.y).unwrap().to_bits());
            assert!((-3.0..=4.0).contains(&p.z));
            assert!(g.slope_at(p.x, p.y).unwrap() <= 0.5);
            let earlier_neighbors = trees[..k]
                .iter()
                .filter(|o| o.base_position.horizontal_distance(p) <= 4.0)
                .count();
            assert!(earlier_neighbors <= 3);
            for o in &trees[..k] {
                assert!(o.base_position.horizontal_distance(p) >= 1.5);
            }
            t.validate().unwrap();
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let g = rough();
        let table = SpeciesTable::default();
        let a = place_trees(&g, &permissive(300.0), &table, 5).unwrap();
        let b = place_trees(&g, &permissive(300.0), &table, 5).unwrap();
        assert_eq!(a, b);
        let c = place_trees(&g, &permissive(300.0), &table, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn understorey_counts() {
        let g = TerrainGrid::flat(100.0, 1.0, 0.0).unwrap();
        assert!(place_understorey(&g, &UnderstoreyDensity::zero(), 1).unwrap().is_empty());
        let d = UnderstoreyDensity {
            grass: 1000.0,
            ..UnderstoreyDensity::zero()
        };
        let props = place_understorey(&g, &d, 3).unwrap();
        assert_eq!(props.len(), 1000);
        assert!(props.iter().all(|p| p.kind == PropKind::Grass && p.scale > 0.0));
        assert_eq!(props, place_understorey(&g, &d, 3).unwrap());
    }
}
