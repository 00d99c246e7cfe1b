//! Wage bins and exposure groups.
//!
//! Bins are anchored at the prefecture's new minimum wage, so every 100-JPY
//! exposure band `[MW + 100e, MW + 100e + 99]` is an exact union of bins and
//! no bin can straddle a band boundary.

use std::fmt;

use crate::error::{Error, Result};

/// Distance band of a wage bin relative to the new minimum wage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExposureGroup {
    /// Below the lowest band; kept for description, dropped from estimation.
    Excluded,
    Finite(i32),
    /// Upper tail assumed untouched by the revision (control group).
    Infinite,
}

impl ExposureGroup {
    pub fn finite(self) -> Option<i32> {
        match self {
            ExposureGroup::Finite(e) => Some(e),
            _ => None,
        }
    }
}

impl fmt::Display for ExposureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExposureGroup::Excluded => f.write_str("excluded"),
            ExposureGroup::Finite(e) => write!(f, "{e}"),
            ExposureGroup::Infinite => f.write_str("inf"),
        }
    }
}

/// Bin and band geometry, in JPY.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinningRule {
    pub bin_width: i32,
    pub group_width: i32,
    pub max_e: i32,
    pub spill_offset: i32,
}

impl Default for BinningRule {
    fn default() -> Self {
        Self {
            bin_width: 10,
            group_width: 100,
            max_e: 3,
            spill_offset: 400,
        }
    }
}

impl BinningRule {
    pub fn validate(&self) -> Result<()> {
        if self.bin_width <= 0 || self.group_width <= 0 || self.spill_offset <= 0 {
            return Err(Error::Config("bin, group and spill widths must be positive".into()));
        }
        if self.group_width % self.bin_width != 0 {
            return Err(Error::Config(format!(
                "bin width {} does not divide group width {}",
                self.bin_width, self.group_width
            )));
        }
        if self.max_e < 0 {
            return Err(Error::Config("max_e must be non-negative".into()));
        }
        if self.spill_offset % self.group_width != 0 {
            return Err(Error::Config("spill offset must be a multiple of the group width".into()));
        }
        if self.spill_offset > self.group_width * (self.max_e + 1) {
            return Err(Error::Config(format!(
                "spill offset {} leaves wages between the top band and the control group unassigned",
                self.spill_offset
            )));
        }
        Ok(())
    }

    /// Highest finite band once the spill threshold is applied.
    pub fn top_group(&self) -> i32 {
        (self.spill_offset / self.group_width - 1).min(self.max_e)
    }

    /// Finite bands `-1..=top_group`.
    pub fn finite_groups(&self) -> impl Iterator<Item = i32> {
        -1..=self.top_group()
    }

    pub fn bins_per_group(&self) -> i32 {
        self.group_width / self.bin_width
    }

    /// Lower edges of every bin of the finite bands for a prefecture.
    pub fn finite_grid(&self, new_mw: u32) -> impl Iterator<Item = i32> {
        let mw = new_mw as i32;
        let lo = mw - self.group_width;
        let hi = mw + self.group_width * (self.top_group() + 1);
        let w = self.bin_width;
        (0..(hi - lo) / w).map(move |k| lo + k * w)
    }

    pub fn assign_bin(&self, wage: u32, new_mw: u32) -> Result<i32> {
        assign_bin(wage, new_mw, self.bin_width)
    }

    pub fn assign_group(&self, bin_lower: i32, new_mw: u32) -> Result<ExposureGroup> {
        let mw = new_mw as i32;
        let (w, g) = (self.bin_width, self.group_width);
        if (bin_lower - mw).rem_euclid(w) != 0 {
            return Err(Error::Internal(format!(
                "bin {bin_lower} is not aligned to minimum wage {mw}"
            )));
        }
        if bin_lower + w - 1 < mw - g {
            return Ok(ExposureGroup::Excluded);
        }
        if bin_lower >= mw + self.spill_offset {
            return Ok(ExposureGroup::Infinite);
        }
        let e = (bin_lower - mw).div_euclid(g);
        let band_lo = mw + g * e;
        let band_hi = band_lo + g - 1;
        if bin_lower < band_lo || bin_lower + w - 1 > band_hi || e < -1 || e > self.top_group() {
            return Err(Error::Internal(format!(
                "bin [{bin_lower}, {}] straddles band {e} for minimum wage {mw}",
                bin_lower + w - 1
            )));
        }
        Ok(ExposureGroup::Finite(e))
    }

    /// Bin and group of a wage in one step.
    pub fn classify(&self, wage: u32, new_mw: u32) -> Result<(i32, ExposureGroup)> {
        let bin = self.assign_bin(wage, new_mw)?;
        Ok((bin, self.assign_group(bin, new_mw)?))
    }
}

/// Lower edge of the `bin_width` bin, anchored at `new_mw`, containing `wage`.
pub fn assign_bin(wage: u32, new_mw: u32, bin_width: i32) -> Result<i32> {
    if wage < 1 {
        return Err(Error::InvalidRecord(format!("non-positive wage {wage}")));
    }
    if bin_width <= 0 {
        return Err(Error::Config("bin width must be positive".into()));
    }
    let mw = new_mw as i32;
    Ok(mw + bin_width * (wage as i32 - mw).div_euclid(bin_width))
}

/// [`BinningRule::assign_group`] with default band geometry overrides.
pub fn assign_group(
    bin_lower: i32,
    new_mw: u32,
    group_width: i32,
    max_e: i32,
    spill_offset: i32,
) -> Result<ExposureGroup> {
    let rule = BinningRule {
        bin_width: 10,
        group_width,
        max_e,
        spill_offset,
    };
    rule.validate()?;
    rule.assign_group(bin_lower, new_mw)
}
