//! Layered file format.
//!
//! ```text
//! "TLXS" | version u8 | components u8 | bit_depth u8 | coder id u8
//!        | width u32 | height u32 | base length u32 | extension length u32
//!        | crc32 u32 | reserved [0; 4]
//!        | base payload | extension payload
//! ```
//!
//! Integers are big-endian and the header is exactly [`HEADER_LEN`] bytes.
//! The checksum covers every header byte except its own four. Coder id 0
//! marks a file without an extension layer; a base length of 0 marks a
//! file coded losslessly without a base layer. Payloads carry no checksum.

use crate::base::{decode_base, BaseHeader};
use crate::error::{Error, Result};
use crate::image::{PlanarImage, MAX_BIT_DEPTH, MIN_BIT_DEPTH};
use crate::residual::{extension_info, LosslessCoderId};

pub const CONTAINER_MAGIC: [u8; 4] = *b"TLXS";
pub const CONTAINER_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 32;

const CRC_RANGE: std::ops::Range<usize> = 24..28;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContainerMeta {
    pub width: usize,
    pub height: usize,
    pub components: usize,
    /// Bit depth `N` of the original image.
    pub bit_depth: u8,
    /// `None` exactly when the extension layer is absent.
    pub coder: Option<LosslessCoderId>,
}

impl ContainerMeta {
    /// Depth of the samples the extension coder sees: `N + 1` for a
    /// residual, `N` when the image is coded without a base layer.
    pub fn extension_depth(&self, has_base: bool) -> u8 {
        if has_base {
            self.bit_depth + 1
        } else {
            self.bit_depth
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InconsistentMeta(msg));
        if self.width == 0 || self.height == 0 {
            return bad("zero-area image".into());
        }
        if u32::try_from(self.width).is_err() || u32::try_from(self.height).is_err() {
            return bad(format!(
                "dimensions {}x{} exceed 32 bits",
                self.width, self.height
            ));
        }
        if !matches!(self.components, 1 | 3) {
            return bad(format!("{} components", self.components));
        }
        if !(MIN_BIT_DEPTH..=MAX_BIT_DEPTH).contains(&self.bit_depth) {
            return bad(format!("bit depth {}", self.bit_depth));
        }
        Ok(())
    }
}

/// A demultiplexed file borrowing its payloads from the input buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayeredFile<'a> {
    pub meta: ContainerMeta,
    pub base: &'a [u8],
    pub extension: &'a [u8],
}

impl LayeredFile<'_> {
    pub fn has_base(&self) -> bool {
        !self.base.is_empty()
    }

    pub fn has_extension(&self) -> bool {
        !self.extension.is_empty()
    }

    pub fn total_len(&self) -> usize {
        HEADER_LEN + self.base.len() + self.extension.len()
    }
}

fn header_crc(header: &[u8]) -> u32 {
    let mut hasher = crc32fast::Hasher::new();
    hasher.update(&header[..CRC_RANGE.start]);
    hasher.update(&header[CRC_RANGE.end..HEADER_LEN]);
    hasher.finalize()
}

fn be_u32(b: &[u8]) -> u32 {
    u32::from_be_bytes([b[0], b[1], b[2], b[3]])
}

fn payload_len(len: usize, what: &str) -> Result<u32> {
    u32::try_from(len).map_err(|_| Error::InconsistentMeta(format!("{what} payload exceeds 4 GiB")))
}

/// Checks that the payload headers agree with `meta`.
fn check_payloads(base: &[u8], ext: &[u8], meta: &ContainerMeta) -> Result<()> {
    if base.is_empty() && ext.is_empty() {
        return Err(Error::InconsistentMeta("file carries neither layer".into()));
    }
    if ext.is_empty() != meta.coder.is_none() {
        return Err(Error::InconsistentMeta(
            "coder id must be present exactly when an extension is".into(),
        ));
    }
    if !base.is_empty() {
        let header = BaseHeader::parse(base)?;
        if (
            header.width,
            header.height,
            header.components,
            header.bit_depth,
        ) != (meta.width, meta.height, meta.components, meta.bit_depth)
        {
            return Err(Error::InconsistentMeta(
                "base layer describes a different image".into(),
            ));
        }
    }
    if let Some(coder) = meta.coder {
        let (ext_coder, depth) = extension_info(ext)?;
        if ext_coder != coder {
            return Err(Error::InconsistentMeta(format!(
                "extension coded with {ext_coder}, header says {coder}"
            )));
        }
        let expected = meta.extension_depth(!base.is_empty());
        if depth != expected {
            return Err(Error::InconsistentMeta(format!(
                "extension depth {depth}, expected {expected}"
            )));
        }
    }
    Ok(())
}

pub fn mux(base: &[u8], ext: &[u8], meta: &ContainerMeta) -> Result<Vec<u8>> {
    meta.validate()?;
    check_payloads(base, ext, meta)?;
    let mut out = Vec::with_capacity(HEADER_LEN + base.len() + ext.len());
    out.extend_from_slice(&CONTAINER_MAGIC);
    out.push(CONTAINER_VERSION);
    out.push(meta.components as u8);
    out.push(meta.bit_depth);
    out.push(meta.coder.map_or(0, LosslessCoderId::as_u8));
    out.extend_from_slice(&(meta.width as u32).to_be_bytes());
    out.extend_from_slice(&(meta.height as u32).to_be_bytes());
    out.extend_from_slice(&payload_len(base.len(), "base")?.to_be_bytes());
    out.extend_from_slice(&payload_len(ext.len(), "extension")?.to_be_bytes());
    out.extend_from_slice(&[0; 8]);
    let crc = header_crc(&out);
    out[CRC_RANGE].copy_from_slice(&crc.to_be_bytes());
    out.extend_from_slice(base);
    out.extend_from_slice(ext);
    Ok(out)
}

/// Splits a file into its layers. Payload contents are not inspected.
pub fn demux(file: &[u8]) -> Result<LayeredFile<'_>> {
    if file.len() < CONTAINER_MAGIC.len() || file[..4] != CONTAINER_MAGIC {
        return Err(Error::BadMagic);
    }
    let header = file.get(..HEADER_LEN).ok_or_else(|| {
        Error::LengthMismatch(format!(
            "{} bytes cannot hold a {HEADER_LEN}-byte header",
            file.len()
        ))
    })?;
    let stored = be_u32(&header[CRC_RANGE]);
    let computed = header_crc(header);
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }
    if header[4] != CONTAINER_VERSION {
        return Err(Error::UnsupportedVersion(header[4]));
    }
    if header[28..HEADER_LEN].iter().any(|&b| b != 0) {
        return Err(Error::InconsistentMeta("nonzero reserved bytes".into()));
    }
    let coder = match header[7] {
        0 => None,
        id => Some(
            LosslessCoderId::from_u8(id)
                .ok_or_else(|| Error::InconsistentMeta(format!("unknown coder id {id}")))?,
        ),
    };
    let meta = ContainerMeta {
        width: be_u32(&header[8..12]) as usize,
        height: be_u32(&header[12..16]) as usize,
        components: usize::from(header[5]),
        bit_depth: header[6],
        coder,
    };
    meta.validate()?;

    let base_len = be_u32(&header[16..20]) as usize;
    let ext_len = be_u32(&header[20..24]) as usize;
    let declared = HEADER_LEN as u64 + base_len as u64 + ext_len as u64;
    if declared != file.len() as u64 {
        return Err(Error::LengthMismatch(format!(
            "header declares {declared} bytes, file has {}",
            file.len()
        )));
    }
    if base_len == 0 && ext_len == 0 {
        return Err(Error::InconsistentMeta("file carries neither layer".into()));
    }
    if (ext_len == 0) != coder.is_none() {
        return Err(Error::InconsistentMeta(
            "coder id must be present exactly when an extension is".into(),
        ));
    }
    let (base, extension) = file[HEADER_LEN..].split_at(base_len);
    Ok(LayeredFile {
        meta,
        base,
        extension,
    })
}

/// Decodes the base layer alone, never touching the extension bytes.
pub fn decode_base_only(file: &[u8]) -> Result<PlanarImage> {
    let layered = demux(file)?;
    if !layered.has_base() {
        return Err(Error::MissingBaseLayer);
    }
    let image = decode_base(layered.base)?;
    let meta = layered.meta;
    if (
        image.width(),
        image.height(),
        image.components(),
        image.bit_depth(),
    ) != (meta.width, meta.height, meta.components, meta.bit_depth)
    {
        return Err(Error::InconsistentMeta(
            "base layer describes a different image".into(),
        ));
    }
    Ok(image)
}
