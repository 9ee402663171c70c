//! Named subshift fixtures.
//!
//! `golden`, `even`, `primegap:G`, `full:R`, `digits:R:DDD` (one base-36
//! character per allowed digit) and `file:PATH` for the fixture text format.

use std::fs;

use multinv_core::subshift::{self, Subshift};
use multinv_core::Radix;

use crate::Error;

pub fn resolve(name: &str) -> Result<Subshift, Error> {
    let bad = |why: &str| Error::Fixture { name: name.to_string(), message: why.to_string() };
    let mut parts = name.splitn(3, ':');
    let head = parts.next().unwrap_or("");
    let radix = |s: Option<&str>| -> Result<Radix, Error> {
        let r: u32 = s.and_then(|x| x.parse().ok()).ok_or_else(|| bad("missing or malformed radix"))?;
        Radix::new(r).map_err(|_| bad("radix below 2"))
    };
    match head {
        "golden" => Ok(subshift::golden_mean()),
        "even" => Ok(subshift::even_shift()),
        "primegap" => {
            let g: usize = parts.next().and_then(|x| x.parse().ok()).ok_or_else(|| bad("missing gap cap"))?;
            subshift::prime_gap_shift(g).map_err(|e| bad(&e.to_string()))
        }
        "full" => Ok(subshift::full_shift(radix(parts.next())?)),
        "digits" => {
            let r = radix(parts.next())?;
            let digits = parse_digits(parts.next().ok_or_else(|| bad("missing digit list"))?).ok_or_else(|| bad("bad digit"))?;
            subshift::restricted_digits(r, &digits).map_err(|e| bad(&e.to_string()))
        }
        "file" => {
            let path = name.strip_prefix("file:").unwrap_or_default();
            let text = fs::read_to_string(path).map_err(|e| bad(&e.to_string()))?;
            subshift::parse_fixture(&text).map_err(|e| bad(&e.to_string()))
        }
        _ => Err(bad("unknown fixture")),
    }
}

/// Radix and allowed digits of a `digits:` or `full:` fixture.
pub fn digit_set(name: &str) -> Option<(u32, Vec<u32>)> {
    let mut parts = name.splitn(3, ':');
    let head = parts.next()?;
    let r: u32 = parts.next()?.parse().ok()?;
    match head {
        "full" if r >= 2 => return Some((r, (0..r).collect())),
        "digits" => {}
        _ => return None,
    }
    let mut d = parse_digits(parts.next()?)?;
    d.sort_unstable();
    d.dedup();
    Some((r, d))
}

fn parse_digits(s: &str) -> Option<Vec<u32>> {
    s.chars().map(|c| c.to_digit(36)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert_eq!(resolve("golden").unwrap().radix().get(), 2);
        assert_eq!(resolve("digits:4:03").unwrap().radix().get(), 4);
        assert_eq!(resolve("full:7").unwrap().language_count(2), 49u32.into());
        assert!(resolve("primegap:1").is_err());
        assert!(resolve("digits:4:09").is_err());
        assert!(resolve("nope").is_err());
        assert_eq!(digit_set("digits:10:210"), Some((10, vec![0, 1, 2])));
        assert_eq!(digit_set("golden"), None);
        assert_eq!(digit_set("full:3"), Some((3, vec![0, 1, 2])));
    }
}
