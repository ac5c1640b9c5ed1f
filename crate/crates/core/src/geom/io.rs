//! Cloud file formats: the "AOPC" binary cloud and ascii PLY export.
//!
//! AOPC layout, all little-endian:
//! magic `AOPC`, version u16, point count u32, attribute-presence bitmask u16
//! (bit 0 normals, bit 1 curvature, bit 2 link_id, bit 3 surface_id), then
//! f32 arrays in declared order: positions, normals, curvature, link_id as
//! u32, surface_id as u32 + 2xf32.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{Frame, Point3, PointCloud, SurfaceId, Vec3};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"AOPC";
const VERSION: u16 = 1;

const BIT_NORMALS: u16 = 1 << 0;
const BIT_CURVATURE: u16 = 1 << 1;
const BIT_LINK_ID: u16 = 1 << 2;
const BIT_SURFACE_ID: u16 = 1 << 3;

pub fn write_aopc<W: Write>(mut w: W, cloud: &PointCloud) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u16::<LittleEndian>(VERSION)?;
    w.write_u32::<LittleEndian>(cloud.len() as u32)?;
    let mut mask = 0u16;
    if cloud.normals.is_some() {
        mask |= BIT_NORMALS;
    }
    if cloud.curvature.is_some() {
        mask |= BIT_CURVATURE;
    }
    if cloud.link_id.is_some() {
        mask |= BIT_LINK_ID;
    }
    if cloud.surface_id.is_some() {
        mask |= BIT_SURFACE_ID;
    }
    w.write_u16::<LittleEndian>(mask)?;
    for p in &cloud.points {
        w.write_f32::<LittleEndian>(p.x as f32)?;
        w.write_f32::<LittleEndian>(p.y as f32)?;
        w.write_f32::<LittleEndian>(p.z as f32)?;
    }
    if let Some(ns) = &cloud.normals {
        for n in ns {
            w.write_f32::<LittleEndian>(n.x as f32)?;
            w.write_f32::<LittleEndian>(n.y as f32)?;
            w.write_f32::<LittleEndian>(n.z as f32)?;
        }
    }
    if let Some(cs) = &cloud.curvature {
        for &c in cs {
            w.write_f32::<LittleEndian>(c as f32)?;
        }
    }
    if let Some(ls) = &cloud.link_id {
        for &l in ls {
            w.write_u32::<LittleEndian>(l)?;
        }
    }
    if let Some(ss) = &cloud.surface_id {
        for s in ss {
            w.write_u32::<LittleEndian>(s.triangle)?;
            w.write_f32::<LittleEndian>(s.bary[0] as f32)?;
            w.write_f32::<LittleEndian>(s.bary[1] as f32)?;
        }
    }
    Ok(())
}

pub fn read_aopc<R: Read>(mut r: R) -> Result<PointCloud> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::BadFormat("not an AOPC file".into()));
    }
    let version = r.read_u16::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::BadFormat(format!("unsupported AOPC version {version}")));
    }
    let count = r.read_u32::<LittleEndian>()? as usize;
    let mask = r.read_u16::<LittleEndian>()?;
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let x = r.read_f32::<LittleEndian>()? as f64;
        let y = r.read_f32::<LittleEndian>()? as f64;
        let z = r.read_f32::<LittleEndian>()? as f64;
        points.push(Point3::new(x, y, z));
    }
    let normals = if mask & BIT_NORMALS != 0 {
        let mut ns = Vec::with_capacity(count);
        for _ in 0..count {
            let x = r.read_f32::<LittleEndian>()? as f64;
            let y = r.read_f32::<LittleEndian>()? as f64;
            let z = r.read_f32::<LittleEndian>()? as f64;
            let v = Vec3::new(x, y, z);
            // f32 quantization breaks the unit invariant; restore it
            ns.push(if v.norm() > 0.0 { v.normalize() } else { Vec3::z() });
        }
        Some(ns)
    } else {
        None
    };
    let curvature = if mask & BIT_CURVATURE != 0 {
        let mut cs = Vec::with_capacity(count);
        for _ in 0..count {
            cs.push((r.read_f32::<LittleEndian>()? as f64).clamp(0.0, 1.0));
        }
        Some(cs)
    } else {
        None
    };
    let link_id = if mask & BIT_LINK_ID != 0 {
        let mut ls = Vec::with_capacity(count);
        for _ in 0..count {
            ls.push(r.read_u32::<LittleEndian>()?);
        }
        Some(ls)
    } else {
        None
    };
    let surface_id = if mask & BIT_SURFACE_ID != 0 {
        let mut ss = Vec::with_capacity(count);
        for _ in 0..count {
            let triangle = r.read_u32::<LittleEndian>()?;
            let u = r.read_f32::<LittleEndian>()? as f64;
            let v = r.read_f32::<LittleEndian>()? as f64;
            ss.push(SurfaceId {
                triangle,
                bary: [u, v],
            });
        }
        Some(ss)
    } else {
        None
    };
    let cloud = PointCloud {
        points,
        normals,
        curvature,
        link_id,
        surface_id,
        frame: Frame::World,
    };
    cloud.validate()?;
    Ok(cloud)
}

/// Ascii PLY export for visualization. `heat`, when given, is encoded as a
/// blue-to-red vertex color.
pub fn write_ply<W: Write>(mut w: W, cloud: &PointCloud, heat: Option<&[f64]>) -> Result<()> {
    if let Some(h) = heat {
        if h.len() != cloud.len() {
            return Err(Error::LengthMismatch(h.len(), cloud.len()));
        }
    }
    let has_normals = cloud.normals.is_some();
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "element vertex {}", cloud.len())?;
    writeln!(w, "property float x")?;
    writeln!(w, "property float y")?;
    writeln!(w, "property float z")?;
    if has_normals {
        writeln!(w, "property float nx")?;
        writeln!(w, "property float ny")?;
        writeln!(w, "property float nz")?;
    }
    if heat.is_some() {
        writeln!(w, "property uchar red")?;
        writeln!(w, "property uchar green")?;
        writeln!(w, "property uchar blue")?;
    }
    writeln!(w, "end_header")?;
    for i in 0..cloud.len() {
        let p = cloud.points[i];
        write!(w, "{} {} {}", p.x as f32, p.y as f32, p.z as f32)?;
        if let Some(ns) = &cloud.normals {
            let n = ns[i];
            write!(w, " {} {} {}", n.x as f32, n.y as f32, n.z as f32)?;
        }
        if let Some(h) = heat {
            let t = h[i].clamp(0.0, 1.0);
            let r = (t * 255.0).round() as u8;
            let b = ((1.0 - t) * 255.0).round() as u8;
            write!(w, " {} {} {}", r, 32, b)?;
        }
        writeln!(w)?;
    }
    Ok(())
}
