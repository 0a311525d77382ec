//! Regressor persistence in the `JTIE` container under method tag 6.
//!
//! After the common header (magic, version, tag byte, output dimension `u32`)
//! comes the layer-shape header (`u32` layer count, then `fan_in`, `fan_out`
//! as `u32` pairs), every layer's weights (row-major `f64`) followed by its
//! bias, the iteration counter as `u64`, and the configuration as a
//! length-prefixed JSON string.

use std::io::{Read, Write};

use byteorder::{ReadBytesExt, WriteBytesExt};
use ndarray::{Array1, Array2};

use super::{Layer, RegressorConfig, VisualRegressor};
use crate::binio;
use crate::error::{Error, Result};
use crate::textemb::{MODEL_MAGIC, MODEL_VERSION};

pub const REGRESSOR_TAG: u8 = 6;
const KIND: &str = "regressor";

pub fn write_regressor<W: Write>(w: &mut W, m: &VisualRegressor) -> Result<()> {
    binio::write_magic(w, MODEL_MAGIC, MODEL_VERSION)?;
    w.write_u8(REGRESSOR_TAG)?;
    binio::write_u32(w, m.output_dim())?;
    binio::write_u32(w, m.layers.len())?;
    for l in &m.layers {
        binio::write_u32(w, l.fan_in())?;
        binio::write_u32(w, l.fan_out())?;
    }
    for l in &m.layers {
        binio::write_f64s(w, l.weights.as_standard_layout().as_slice().expect("standard layout"))?;
        binio::write_f64s(w, l.bias.as_slice().expect("contiguous"))?;
    }
    binio::write_u64(w, m.iteration as u64)?;
    let cfg = serde_json::to_string(&m.config).map_err(|e| Error::format(KIND, e.to_string()))?;
    binio::write_str(w, &cfg)?;
    Ok(())
}

pub fn read_regressor<R: Read>(r: &mut R) -> Result<VisualRegressor> {
    let version = binio::read_magic(r, MODEL_MAGIC, KIND)?;
    if version != MODEL_VERSION {
        return Err(Error::format(KIND, format!("unsupported version {version}")));
    }
    let tag = r.read_u8()?;
    if tag != REGRESSOR_TAG {
        return Err(Error::format(KIND, format!("method tag {tag} is not a regressor")));
    }
    let out_dim = binio::read_u32(r)?;
    let n_layers = binio::read_u32(r)?;
    if n_layers == 0 || n_layers > 1024 {
        return Err(Error::format(KIND, "bad layer count"));
    }
    let mut shapes = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        shapes.push((binio::read_u32(r)?, binio::read_u32(r)?));
    }
    if shapes.windows(2).any(|w| w[0].1 != w[1].0) || shapes.last().map(|s| s.1) != Some(out_dim) {
        return Err(Error::format(KIND, "layer shapes do not chain"));
    }
    let mut layers = Vec::with_capacity(n_layers);
    for &(fan_in, fan_out) in &shapes {
        let w = binio::read_f64s(r, fan_in * fan_out)?;
        let b = binio::read_f64s(r, fan_out)?;
        layers.push(Layer {
            weights: Array2::from_shape_vec((fan_out, fan_in), w).map_err(|e| Error::format(KIND, e.to_string()))?,
            bias: Array1::from(b),
        });
    }
    let iteration = binio::read_u64(r)? as usize;
    let cfg_json = binio::read_str(r, KIND)?;
    let config: RegressorConfig = serde_json::from_str(&cfg_json).map_err(|e| Error::format(KIND, e.to_string()))?;
    if config.layer_shapes() != shapes {
        return Err(Error::format(KIND, "configuration does not match layer shapes"));
    }
    let mut m = VisualRegressor::from_layers(layers, config);
    m.iteration = iteration;
    Ok(m)
}
