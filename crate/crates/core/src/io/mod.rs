//! Configuration input and data output: key=value configs, CSV tables with
//! JSON sidecars, SVG line plots and the run manifest.

pub mod config;
pub mod manifest;
pub mod svg;
pub mod table;

pub use config::{parse_config, Settings};
pub use manifest::{RunManifest, TOOL_VERSION};
pub use svg::{render_svg, write_svg, Series};
pub use table::{format_number, read_csv, write_csv, write_json, Table};
