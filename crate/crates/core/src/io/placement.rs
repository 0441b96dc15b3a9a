use std::fmt::Write;

use super::{real, Records};
use crate::assembly::Placement;
use crate::error::{Error, Result};
use crate::geometry::{Point2, Pose};

const KIND: &str = "linepuzzle-placement";
const VERSION: u32 = 1;

/// ```text
/// linepuzzle-placement 1
/// pose <id> <x> <y> <rotation>
/// unplaced <id>
/// conflicts <count>
/// ```
pub fn write_placement(p: &Placement) -> String {
    let mut s = format!("{KIND} {VERSION}\n");
    for (id, pose) in &p.poses {
        writeln!(
            s,
            "pose {id} {} {} {}",
            real(pose.position.x),
            real(pose.position.y),
            pose.rotation
        )
        .unwrap();
    }
    for id in &p.unplaced {
        writeln!(s, "unplaced {id}").unwrap();
    }
    writeln!(s, "conflicts {}", p.conflicts_resolved).unwrap();
    s
}

pub fn read_placement(text: &str) -> Result<Placement> {
    let mut rec = Records::new(text);
    rec.header(KIND, VERSION)?;
    let mut out = Placement::default();
    let mut conflicts = None;
    while let Some(r) = rec.next_record() {
        if conflicts.is_some() {
            return Err(Error::format(r.line, "records after 'conflicts'"));
        }
        match r.fields[0] {
            "pose" => {
                r.arity(5)?;
                let id: u32 = r.parse(1)?;
                let pose = Pose::new(Point2::new(r.real(2)?, r.real(3)?), r.parse(4)?);
                if out.poses.insert(id, pose).is_some() {
                    return Err(Error::format(r.line, format!("piece {id} placed twice")));
                }
            }
            "unplaced" => {
                r.arity(2)?;
                let id: u32 = r.parse(1)?;
                if out.poses.contains_key(&id) || out.unplaced.contains(&id) {
                    return Err(Error::format(r.line, format!("piece {id} listed twice")));
                }
                out.unplaced.push(id);
            }
            "conflicts" => {
                r.arity(2)?;
                conflicts = Some(r.parse(1)?);
            }
            other => return Err(Error::format(r.line, format!("unknown record '{other}'"))),
        }
    }
    out.conflicts_resolved = conflicts.ok_or_else(|| Error::format(rec.line() + 1, "missing 'conflicts' record"))?;
    out.unplaced.sort_unstable();
    Ok(out)
}
