//! Binary graph files.
//!
//! Layout, all little-endian: magic `EMTG`, format version (u32), the six
//! parameters (four u64 counts, edge fraction as f64, seed as u64), then for
//! each entity its descriptor count (u32) and ids (u32 each) followed by its
//! verb count (u32) and `(verb id u32, direction u8)` pairs.

use std::io::{Read, Write};

use super::{verb_lists, Direction, TypeGraph, TypeGraphError, TypeGraphParams};

const MAGIC: &[u8; 4] = b"EMTG";
const FORMAT_VERSION: u32 = 1;

pub fn write_typegraph<W: Write>(graph: &TypeGraph, mut w: W) -> Result<(), TypeGraphError> {
    let p = &graph.params;
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    for n in [p.n_entities, p.n_desc_props, p.n_classes, p.n_verbs] {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    w.write_all(&p.edge_fraction.to_le_bytes())?;
    w.write_all(&p.seed.to_le_bytes())?;
    for (desc, verbs) in graph.entity_desc.iter().zip(&graph.entity_verbs) {
        w.write_all(&(desc.len() as u32).to_le_bytes())?;
        for k in desc {
            w.write_all(&k.to_le_bytes())?;
        }
        w.write_all(&(verbs.len() as u32).to_le_bytes())?;
        for &(v, d) in verbs {
            w.write_all(&v.to_le_bytes())?;
            w.write_all(&[d.code()])?;
        }
    }
    w.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], TypeGraphError> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::UnexpectedEof => {
                    TypeGraphError::Format("truncated file".into())
                }
                _ => TypeGraphError::Io(e),
            })?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32, TypeGraphError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64, TypeGraphError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
}

pub fn read_typegraph<R: Read>(r: R) -> Result<TypeGraph, TypeGraphError> {
    let mut r = Reader { inner: r };
    let bad = |m: String| TypeGraphError::Format(m);
    if &r.bytes::<4>()? != MAGIC {
        return Err(bad("not a graph file".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(bad(format!("unsupported format version {version}")));
    }
    let mut counts = [0usize; 4];
    for c in &mut counts {
        *c = usize::try_from(r.u64()?).map_err(|_| bad("count overflows".into()))?;
    }
    let edge_fraction = f64::from_le_bytes(r.bytes()?);
    let seed = r.u64()?;
    let params = TypeGraphParams {
        n_entities: counts[0],
        n_desc_props: counts[1],
        n_classes: counts[2],
        n_verbs: counts[3],
        edge_fraction,
        seed,
    };
    params.validate()?;

    let mut entity_desc = Vec::with_capacity(params.n_entities);
    let mut entity_verbs = Vec::with_capacity(params.n_entities);
    for e in 0..params.n_entities {
        let class = e / params.entities_per_class();
        let n = r.u32()? as usize;
        if n > params.descriptors_per_class() {
            return Err(bad(format!("entity {e}: {n} descriptors exceed its class")));
        }
        let mut desc = Vec::with_capacity(n);
        for _ in 0..n {
            let k = r.u32()?;
            if k as usize >= params.n_desc_props
                || k as usize / params.descriptors_per_class() != class
            {
                return Err(bad(format!("entity {e}: descriptor {k} outside its class")));
            }
            desc.push(k);
        }
        if !desc.windows(2).all(|w| w[0] < w[1]) {
            return Err(bad(format!(
                "entity {e}: descriptors not strictly ascending"
            )));
        }
        let n = r.u32()? as usize;
        if n > params.verbs_per_class() {
            return Err(bad(format!("entity {e}: {n} verbs exceed its class")));
        }
        let mut verbs = Vec::with_capacity(n);
        for _ in 0..n {
            let v = r.u32()?;
            let [d] = r.bytes::<1>()?;
            let d = Direction::from_code(d)
                .ok_or_else(|| bad(format!("entity {e}: bad direction code {d}")))?;
            if v as usize >= params.n_verbs || v as usize / params.verbs_per_class() != class {
                return Err(bad(format!("entity {e}: verb {v} outside its class")));
            }
            verbs.push((v, d));
        }
        if !verbs.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(bad(format!("entity {e}: verbs not strictly ascending")));
        }
        entity_desc.push(desc);
        entity_verbs.push(verbs);
    }
    if r.inner.read(&mut [0u8; 1])? != 0 {
        return Err(bad("trailing bytes".into()));
    }
    let (verb_subjects, verb_objects) = verb_lists(params.n_verbs, &entity_verbs);
    Ok(TypeGraph {
        params,
        entity_desc,
        entity_verbs,
        verb_subjects,
        verb_objects,
    })
}
