//! Software rendering of forest scenes into RGB, metric depth and instance-id buffers.

mod camera;
mod conditions;
mod depth;
mod frame;
pub mod raster;
mod scene;
mod shadow;
mod weather;

pub use camera::{place_camera, CameraBasis, CameraConfig, CameraPose};
pub use conditions::{ConditionWeights, Conditions, Lighting, TimeOfDay, Weather};
pub use depth::{encode_depth, DEFAULT_D_MAX};
pub use frame::{render_frame, render_frame_with, FrameBundle, RenderOptions};
pub use scene::{Scene, SceneConfig};
pub use weather::{apply_weather, fog_factor};
