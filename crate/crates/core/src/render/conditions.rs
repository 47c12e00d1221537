use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::seed::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TimeOfDay {
    Morning,
    Daylight,
    Evening,
    Dusk,
}

impl TimeOfDay {
    pub const ALL: [TimeOfDay; 4] = [
        TimeOfDay::Morning,
        TimeOfDay::Daylight,
        TimeOfDay::Evening,
        TimeOfDay::Dusk,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Weather {
    Clear,
    Fog,
    Rain,
    Snow,
}

impl Weather {
    pub const ALL: [Weather; 4] = [Weather::Clear, Weather::Fog, Weather::Rain, Weather::Snow];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conditions {
    pub time_of_day: TimeOfDay,
    pub weather: Weather,
    /// Extinction coefficient, 1/m.
    pub fog_density: f64,
    pub precipitation_intensity: f64,
    pub wet: bool,
    pub snow_cover: f64,
}

impl Conditions {
    /// No fog, no precipitation, dry and snow-free.
    pub fn clear(time_of_day: TimeOfDay) -> Self {
        Conditions {
            time_of_day,
            weather: Weather::Clear,
            fog_density: 0.0,
            precipitation_intensity: 0.0,
            wet: false,
            snow_cover: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fog_density >= 0.0) {
            return Err(Error::Parameter("fog_density must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.precipitation_intensity) || !(0.0..=1.0).contains(&self.snow_cover) {
            return Err(Error::Parameter(
                "precipitation_intensity and snow_cover must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Relative frequencies of the time-of-day and weather presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConditionWeights {
    /// MORNING, DAYLIGHT, EVENING, DUSK.
    pub time_of_day: [f64; 4],
    /// CLEAR, FOG, RAIN, SNOW.
    pub weather: [f64; 4],
}

impl Default for ConditionWeights {
    fn default() -> Self {
        ConditionWeights {
            time_of_day: [1.0, 2.0, 1.0, 0.5],
            weather: [4.0, 1.0, 1.0, 1.0],
        }
    }
}

fn check_weights(name: &str, w: &[f64; 4]) -> Result<()> {
    if w.iter().any(|x| !(*x >= 0.0 && x.is_finite())) || w.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Configuration(format!(
            "{name} weights must be non-negative and not all zero"
        )));
    }
    Ok(())
}

fn pick(rng: &mut SimRng, w: &[f64; 4]) -> usize {
    let total: f64 = w.iter().sum();
    let mut r = rng.gen_range(0.0..total);
    for (k, &x) in w.iter().enumerate() {
        if r < x {
            return k;
        }
        r -= x;
    }
    w.iter().rposition(|&x| x > 0.0).unwrap_or(0)
}

impl ConditionWeights {
    pub fn validate(&self) -> Result<()> {
        check_weights("time_of_day", &self.time_of_day)?;
        check_weights("weather", &self.weather)
    }

    pub fn sample(&self, rng: &mut SimRng) -> Conditions {
        let time_of_day = TimeOfDay::ALL[pick(rng, &self.time_of_day)];
        let weather = Weather::ALL[pick(rng, &self.weather)];
        let mut c = Conditions::clear(time_of_day);
        c.weather = weather;
        match weather {
            Weather::Clear => {
                c.fog_density = rng.gen_range(0.0..0.006);
                c.wet = rng.gen_bool(0.15);
            }
            Weather::Fog => {
                c.fog_density = rng.gen_range(0.03..0.12);
                c.wet = rng.gen_bool(0.4);
            }
            Weather::Rain => {
                c.fog_density = rng.gen_range(0.008..0.03);
                c.precipitation_intensity = rng.gen_range(0.3..1.0);
                c.wet = true;
            }
            Weather::Snow => {
                c.fog_density = rng.gen_range(0.008..0.03);
                c.precipitation_intensity = rng.gen_range(0.2..1.0);
                c.snow_cover = rng.gen_range(0.3..0.9);
            }
        }
        c
    }
}

/// Light setup derived from a time-of-day preset. Colors are linear `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lighting {
    /// Unit vector toward the sun.
    pub sun_direction: Vec3,
    pub sun_color: [f64; 3],
    pub sun_intensity: f64,
    pub ambient: [f64; 3],
    pub sky_horizon: [f64; 3],
    pub sky_zenith: [f64; 3],
    pub fog_color: [f64; 3],
}

fn sun(elevation_deg: f64, azimuth_deg: f64) -> Vec3 {
    let (e, a) = (elevation_deg.to_radians(), azimuth_deg.to_radians());
    Vec3::new(e.cos() * a.cos(), e.cos() * a.sin(), e.sin())
}

impl Lighting {
    /// Sun elevations: morning 15 deg, daylight 55 deg, evening 10 deg, dusk 2 deg.
    pub fn preset(time: TimeOfDay) -> Self {
        match time {
            TimeOfDay::Morning => Lighting {
                sun_direction: sun(15.0, -20.0),
                sun_color: [1.0, 0.86, 0.66],
                sun_intensity: 1.0,
                ambient: [0.30, 0.30, 0.34],
                sky_horizon: [0.88, 0.80, 0.70],
                sky_zenith: [0.45, 0.60, 0.85],
                fog_color: [0.80, 0.78, 0.75],
            },
            TimeOfDay::Daylight => Lighting {
                sun_direction: sun(55.0, -90.0),
                sun_color: [1.0, 1.0, 0.96],
                sun_intensity: 1.1,
                ambient: [0.34, 0.36, 0.40],
                sky_horizon: [0.76, 0.83, 0.92],
                sky_zenith: [0.34, 0.54, 0.88],
                fog_color: [0.80, 0.82, 0.85],
            },
            TimeOfDay::Evening => Lighting {
                sun_direction: sun(10.0, 200.0),
                sun_color: [1.0, 0.62, 0.35],
                sun_intensity: 0.9,
                ambient: [0.27, 0.23, 0.23],
                sky_horizon: [0.95, 0.62, 0.42],
                sky_zenith: [0.36, 0.40, 0.62],
                fog_color: [0.72, 0.60, 0.52],
            },
            TimeOfDay::Dusk => Lighting {
                sun_direction: sun(2.0, 170.0),
                sun_color: [0.55, 0.60, 0.75],
                sun_intensity: 0.35,
                ambient: [0.16, 0.17, 0.22],
                sky_horizon: [0.40, 0.42, 0.52],
                sky_zenith: [0.12, 0.15, 0.28],
                fog_color: [0.36, 0.38, 0.46],
            },
        }
    }

    pub fn fog_color_u8(&self) -> [u8; 3] {
        self.fog_color.map(|c| (c * 255.0).round().clamp(0.0, 255.0) as u8)
    }
}
