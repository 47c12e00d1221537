use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{
    build_prop_geometry, build_tree_geometry, place_trees, place_understorey, Mesh, PropInstance,
    SpawnRules, SpeciesTable, SurfaceKind, TreeInstance, Triangle, UnderstoreyDensity,
};
use crate::geom::Vec3;
use crate::seed::{derive_seed, hash_keys, unit_f64};
use crate::terrain::{generate_heightmap, HeightmapParams, TerrainGrid, TextureClass};

const TERRAIN_CHUNK: usize = 16;

/// A cullable group of triangles with precomputed face normals.
#[derive(Debug, Clone)]
pub(crate) struct Batch {
    pub positions: Vec<Vec3>,
    pub triangles: Vec<Triangle>,
    pub normals: Vec<Vec3>,
    pub center: Vec3,
    pub radius: f64,
}

impl Batch {
    fn from_mesh(mesh: Mesh) -> Self {
        let (center, radius) = mesh.bounding_sphere();
        let normals = mesh
            .triangles
            .iter()
            .map(|t| {
                let (a, b, c) = (mesh.vertex(t, 0), mesh.vertex(t, 1), mesh.vertex(t, 2));
                (b - a).cross(c - a).normalized()
            })
            .collect();
        Batch {
            positions: mesh.positions,
            triangles: mesh.triangles,
            normals,
            center,
            radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct SceneConfig {
    pub terrain: HeightmapParams,
    pub spawn: SpawnRules,
    pub understorey: UnderstoreyDensity,
}

/// Everything a frame is rendered from. Geometry is built once and shared
/// read-only by every frame of the scene.
#[derive(Debug, Clone)]
pub struct Scene {
    pub grid: TerrainGrid,
    pub trees: Vec<TreeInstance>,
    pub props: Vec<PropInstance>,
    pub species: SpeciesTable,
    pub(crate) batches: Vec<Batch>,
    tree_lookup: HashMap<u32, usize>,
}

impl Scene {
    pub fn new(
        grid: TerrainGrid,
        trees: Vec<TreeInstance>,
        props: Vec<PropInstance>,
        species: SpeciesTable,
    ) -> Result<Self> {
        Self::build(grid, trees, props, species, true)
    }

    /// Like [`Scene::new`] but the terrain is not drawn (it still serves
    /// height queries). Used for isolated geometry checks.
    pub fn without_terrain_geometry(
        grid: TerrainGrid,
        trees: Vec<TreeInstance>,
        props: Vec<PropInstance>,
        species: SpeciesTable,
    ) -> Result<Self> {
        Self::build(grid, trees, props, species, false)
    }

    /// Terrain, trees and understorey from one scene seed.
    pub fn generate(scene_seed: u64, config: &SceneConfig, species: SpeciesTable) -> Result<Self> {
        let grid = generate_heightmap(derive_seed(scene_seed, 0), &config.terrain)?;
        let trees = place_trees(&grid, &config.spawn, &species, derive_seed(scene_seed, 1))?;
        let props = place_understorey(&grid, &config.understorey, derive_seed(scene_seed, 2))?;
        Self::new(grid, trees, props, species)
    }

    fn build(
        grid: TerrainGrid,
        trees: Vec<TreeInstance>,
        props: Vec<PropInstance>,
        species: SpeciesTable,
        draw_terrain: bool,
    ) -> Result<Self> {
        let mut tree_lookup = HashMap::with_capacity(trees.len());
        for (k, t) in trees.iter().enumerate() {
            t.validate()?;
            if t.species >= species.len() {
                return Err(Error::Consistency(format!(
                    "tree {} references unknown species {}",
                    t.id, t.species
                )));
            }
            if tree_lookup.insert(t.id, k).is_some() {
                return Err(Error::Consistency(format!("duplicate tree id {}", t.id)));
            }
        }
        let mut batches = Vec::new();
        if draw_terrain {
            batches.extend(terrain_batches(&grid));
        }
        batches.extend(prop_batches(&grid, &props));
        batches.extend(
            trees
                .iter()
                .map(|t| Batch::from_mesh(build_tree_geometry(t, &species))),
        );
        Ok(Scene {
            grid,
            trees,
            props,
            species,
            batches,
            tree_lookup,
        })
    }

    pub fn tree(&self, id: u32) -> Option<&TreeInstance> {
        self.tree_lookup.get(&id).map(|&k| &self.trees[k])
    }

    pub fn tree_mesh(&self, id: u32) -> Option<Mesh> {
        self.tree(id).map(|t| build_tree_geometry(t, &self.species))
    }

    /// Every drawn triangle with its world-space corners.
    pub fn world_triangles(&self) -> impl Iterator<Item = ([Vec3; 3], &Triangle)> + '_ {
        self.batches.iter().flat_map(|b| {
            b.triangles
                .iter()
                .map(move |t| (t.indices.map(|i| b.positions[i as usize]), t))
        })
    }

    pub fn triangle_count(&self) -> usize {
        self.batches.iter().map(|b| b.triangles.len()).sum()
    }
}

fn texture_color(class: TextureClass, jitter: f64) -> [f32; 3] {
    let base = match class {
        TextureClass::Moss => [0.24, 0.33, 0.14],
        TextureClass::Roots => [0.34, 0.25, 0.16],
        TextureClass::Mud => [0.22, 0.17, 0.12],
    };
    let k = 0.85 + 0.3 * jitter;
    base.map(|c: f64| (c * k) as f32)
}

fn terrain_batches(grid: &TerrainGrid) -> Vec<Batch> {
    let (nx, ny) = (grid.width_cells, grid.height_cells);
    let mut out = Vec::new();
    let mut cj = 0;
    while cj + 1 < ny {
        let j_end = (cj + TERRAIN_CHUNK).min(ny - 1);
        let mut ci = 0;
        while ci + 1 < nx {
            let i_end = (ci + TERRAIN_CHUNK).min(nx - 1);
            let cols = i_end - ci + 1;
            let mut mesh = Mesh::default();
            for j in cj..=j_end {
                for i in ci..=i_end {
                    let (x, y) = (i as f64 * grid.cell_size, j as f64 * grid.cell_size);
                    mesh.positions.push(Vec3::new(x, y, grid.node_height(i, j)));
                }
            }
            for j in cj..j_end {
                for i in ci..i_end {
                    let a = ((j - cj) * cols + (i - ci)) as u32;
                    let b = a + 1;
                    let c = a + cols as u32 + 1;
                    let d = a + cols as u32;
                    let jitter = unit_f64(hash_keys(grid.seed, &[i as i64, j as i64]));
                    let color = texture_color(grid.node_texture(i, j), jitter);
                    for indices in [[a, b, c], [a, c, d]] {
                        mesh.triangles.push(Triangle {
                            indices,
                            kind: SurfaceKind::Terrain,
                            instance_id: 0,
                            color,
                        });
                    }
                }
            }
            out.push(Batch::from_mesh(mesh));
            ci = i_end;
        }
        cj = j_end;
    }
    out
}

fn prop_batches(grid: &TerrainGrid, props: &[PropInstance]) -> Vec<Batch> {
    let chunk = TERRAIN_CHUNK as f64 * grid.cell_size;
    let cols = (grid.extent_x() / chunk).floor() as usize + 1;
    let rows = (grid.extent_y() / chunk).floor() as usize + 1;
    let mut meshes = vec![Mesh::default(); cols * rows];
    for p in props {
        let cx = ((p.position.x / chunk).floor().max(0.0) as usize).min(cols - 1);
        let cy = ((p.position.y / chunk).floor().max(0.0) as usize).min(rows - 1);
        meshes[cy * cols + cx].append(&build_prop_geometry(p));
    }
    meshes
        .into_iter()
        .filter(|m| !m.triangles.is_empty())
        .map(Batch::from_mesh)
        .collect()
}
