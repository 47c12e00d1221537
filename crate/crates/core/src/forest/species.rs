//! Tree species templates: ranges for every per-tree attribute drawn at placement.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPECIES_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrownForm {
    /// Lobes stacked along the upper trunk, narrowing upward.
    Conifer,
    /// Lobes clustered around the top of the trunk.
    Broadleaf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesTemplate {
    pub name: String,
    pub crown_form: CrownForm,
    /// Trunk height range, meters.
    pub trunk_height: [f64; 2],
    /// Diameter at felling-cut height, meters.
    pub dbh: [f64; 2],
    pub crown_radius: [f64; 2],
    /// Crown height as a fraction of trunk height.
    pub crown_fraction: [f64; 2],
    /// Number of ellipsoidal crown lobes, 3..=6.
    pub lobes: u32,
    pub bark_color: [f32; 3],
    pub foliage_color: [f32; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesTable {
    pub schema_version: u32,
    pub species: Vec<SpeciesTemplate>,
}

fn ordered_positive(name: &str, field: &str, r: [f64; 2]) -> Result<()> {
    if !(r[0] > 0.0 && r[0] <= r[1] && r[1].is_finite()) {
        return Err(Error::Parameter(format!(
            "species {name}: {field} range {:?} must be positive and ordered",
            r
        )));
    }
    Ok(())
}

impl SpeciesTemplate {
    fn validate(&self) -> Result<()> {
        let n = &self.name;
        ordered_positive(n, "trunk_height", self.trunk_height)?;
        ordered_positive(n, "dbh", self.dbh)?;
        ordered_positive(n, "crown_radius", self.crown_radius)?;
        ordered_positive(n, "crown_fraction", self.crown_fraction)?;
        if self.crown_fraction[1] > 0.95 {
            return Err(Error::Parameter(format!("species {n}: crown_fraction above 0.95")));
        }
        if !(3..=6).contains(&self.lobes) {
            return Err(Error::Parameter(format!("species {n}: lobes must be in 3..=6")));
        }
        let colors = self.bark_color.iter().chain(&self.foliage_color);
        if colors.into_iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::Parameter(format!("species {n}: colors must lie in [0, 1]")));
        }
        Ok(())
    }
}

impl SpeciesTable {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SPECIES_SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported species schema_version {} (expected {SPECIES_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.species.is_empty() {
            return Err(Error::Parameter("species table is empty".into()));
        }
        self.species.iter().try_for_each(SpeciesTemplate::validate)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: SpeciesTable =
            toml::from_str(text).map_err(|e| Error::Format(format!("species table: {e}")))?;
        table.validate()?;
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("species table serializes")
    }

    pub fn len(&self) -> usize {
        self.species.len()
    }

    pub fn is_empty(&self) -> bool {
        self.species.is_empty()
    }

    pub fn get(&self, index: usize) -> &SpeciesTemplate {
        &self.species[index]
    }
}

struct Base {
    name: &'static str,
    form: CrownForm,
    trunk_height: [f64; 2],
    dbh: [f64; 2],
    crown_radius: [f64; 2],
    crown_fraction: [f64; 2],
    lobes: u32,
}

const BASES: [Base; 6] = [
    Base {
        name: "fir",
        form: CrownForm::Conifer,
        trunk_height: [14.0, 26.0],
        dbh: [0.18, 0.55],
        crown_radius: [1.3, 2.4],
        crown_fraction: [0.55, 0.8],
        lobes: 6,
    },
    Base {
        name: "spruce",
        form: CrownForm::Conifer,
        trunk_height: [15.0, 28.0],
        dbh: [0.2, 0.6],
        crown_radius: [1.5, 2.6],
        crown_fraction: [0.6, 0.85],
        lobes: 5,
    },
    Base {
        name: "pine",
        form: CrownForm::Conifer,
        trunk_height: [14.0, 25.0],
        dbh: [0.18, 0.5],
        crown_radius: [1.6, 2.8],
        crown_fraction: [0.3, 0.45],
        lobes: 4,
    },
    Base {
        name: "beech",
        form: CrownForm::Broadleaf,
        trunk_height: [14.0, 24.0],
        dbh: [0.2, 0.6],
        crown_radius: [2.2, 4.0],
        crown_fraction: [0.4, 0.55],
        lobes: 5,
    },
    Base {
        name: "birch",
        form: CrownForm::Broadleaf,
        trunk_height: [12.0, 20.0],
        dbh: [0.15, 0.4],
        crown_radius: [1.8, 3.0],
        crown_fraction: [0.35, 0.5],
        lobes: 4,
    },
    Base {
        name: "maple",
        form: CrownForm::Broadleaf,
        trunk_height: [12.0, 22.0],
        dbh: [0.2, 0.55],
        crown_radius: [2.4, 4.0],
        crown_fraction: [0.4, 0.55],
        lobes: 3,
    },
];

// (base index, bark, foliage): six base models retextured into 17 variants.
const VARIANTS: [(usize, [f32; 3], [f32; 3]); 17] = [
    (0, [0.30, 0.24, 0.20], [0.10, 0.24, 0.12]),
    (0, [0.36, 0.30, 0.26], [0.13, 0.28, 0.15]),
    (0, [0.26, 0.22, 0.20], [0.08, 0.20, 0.13]),
    (1, [0.33, 0.25, 0.19], [0.09, 0.22, 0.10]),
    (1, [0.40, 0.32, 0.24], [0.12, 0.26, 0.14]),
    (1, [0.28, 0.23, 0.18], [0.07, 0.18, 0.09]),
    (2, [0.46, 0.30, 0.20], [0.16, 0.30, 0.14]),
    (2, [0.50, 0.34, 0.22], [0.19, 0.33, 0.16]),
    (2, [0.42, 0.28, 0.22], [0.14, 0.26, 0.13]),
    (3, [0.52, 0.52, 0.48], [0.24, 0.38, 0.12]),
    (3, [0.46, 0.46, 0.44], [0.42, 0.32, 0.10]),
    (3, [0.56, 0.55, 0.50], [0.30, 0.42, 0.15]),
    (4, [0.82, 0.80, 0.76], [0.30, 0.45, 0.14]),
    (4, [0.76, 0.74, 0.70], [0.52, 0.46, 0.12]),
    (4, [0.86, 0.84, 0.80], [0.26, 0.40, 0.16]),
    (5, [0.40, 0.34, 0.28], [0.28, 0.40, 0.12]),
    (5, [0.36, 0.30, 0.26], [0.55, 0.22, 0.08]),
];

impl Default for SpeciesTable {
    fn default() -> Self {
        let mut counts = [0usize; 6];
        let species = VARIANTS
            .iter()
            .map(|&(b, bark, foliage)| {
                let base = &BASES[b];
                counts[b] += 1;
                SpeciesTemplate {
                    name: format!("{}-{}", base.name, counts[b]),
                    crown_form: base.form,
                    trunk_height: base.trunk_height,
                    dbh: base.dbh,
                    crown_radius: base.crown_radius,
                    crown_fraction: base.crown_fraction,
                    lobes: base.lobes,
                    bark_color: bark,
                    foliage_color: foliage,
                }
            })
            .collect();
        SpeciesTable {
            schema_version: SPECIES_SCHEMA_VERSION,
            species,
        }
    }
}
