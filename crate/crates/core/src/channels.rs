//! Channel bookkeeping: thresholds, reduced masses, angular momenta and the
//! sign choices that pick a sheet of the Riemann energy surface.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{JostError, Result};

/// One two-body channel of the coupled system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    /// Threshold energy, i.e. the branch point this channel contributes.
    pub threshold: f64,
    pub reduced_mass: f64,
    pub angular_momentum: u32,
}

impl Channel {
    pub fn new(threshold: f64, reduced_mass: f64, angular_momentum: u32) -> Result<Self> {
        if !threshold.is_finite() || !reduced_mass.is_finite() {
            return Err(JostError::InvalidInput("non-finite channel parameter".into()));
        }
        if reduced_mass <= 0.0 {
            return Err(JostError::InvalidInput(format!(
                "reduced mass must be positive, got {reduced_mass}"
            )));
        }
        Ok(Channel { threshold, reduced_mass, angular_momentum })
    }
}

/// The full set of coupled channels plus the unit system's hbar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet {
    channels: Vec<Channel>,
    hbar: f64,
}

impl ChannelSet {
    pub fn new(channels: Vec<Channel>, hbar: f64) -> Result<Self> {
        if channels.is_empty() {
            return Err(JostError::InvalidInput("need at least one channel".into()));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(JostError::InvalidInput(format!("hbar must be positive, got {hbar}")));
        }
        Ok(ChannelSet { channels, hbar })
    }

    /// Two s-wave channels with thresholds 0 and 0.1 and unit masses, the
    /// setup the Noro-Taylor potential is defined for.
    pub fn noro_taylor() -> Self {
        ChannelSet {
            channels: vec![
                Channel { threshold: 0.0, reduced_mass: 1.0, angular_momentum: 0 },
                Channel { threshold: 0.1, reduced_mass: 1.0, angular_momentum: 0 },
            ],
            hbar: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor guarantees at least one channel
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Channel momenta k_n = sigma_n sqrt(2 mu_n (E - E_n)) / hbar on the
    /// sheet selected by the signs. The sqrt branch keeps Im k_n >= 0
    /// everywhere for sigma_n = +1, so each energy cut runs along the real
    /// axis above its threshold and the sheet labels are the signs of Im k_n.
    /// On the cut itself we take the upper-rim limit, which is the usual
    /// scattering value k_n > 0 on the physical sheet.
    pub fn momenta(&self, energy: Complex64, sheet: &SheetSelector) -> Result<Vec<Complex64>> {
        if !energy.re.is_finite() || !energy.im.is_finite() {
            return Err(JostError::InvalidInput("non-finite energy".into()));
        }
        if sheet.len() != self.len() {
            return Err(JostError::InvalidInput(format!(
                "sheet selector has {} signs for {} channels",
                sheet.len(),
                self.len()
            )));
        }
        Ok(self
            .channels
            .iter()
            .zip(sheet.signs())
            .map(|(ch, &s)| {
                let w = 2.0 * ch.reduced_mass * (energy - ch.threshold) / (self.hbar * self.hbar);
                let root = w.sqrt();
                let root = if w.im < 0.0 { -root } else { root };
                f64::from(s) * root
            })
            .collect())
    }

    pub fn physical_sheet(&self) -> SheetSelector {
        SheetSelector::physical(self.len())
    }

    /// All 2^N sheets in binary order: bit n of the index flips channel n,
    /// so the physical sheet comes first.
    pub fn enumerate_sheets(&self) -> Result<Vec<SheetSelector>> {
        let n = self.len();
        if n > 16 {
            return Err(JostError::TooManySheets(n));
        }
        Ok((0..1usize << n)
            .map(|bits| {
                SheetSelector {
                    signs: (0..n).map(|c| if bits >> c & 1 == 0 { 1 } else { -1 }).collect(),
                }
            })
            .collect())
    }
}

/// One sign per channel: +1 keeps the principal momentum branch, -1 flips it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SheetSelector {
    signs: Vec<i8>,
}

impl SheetSelector {
    pub fn physical(n_channels: usize) -> Self {
        SheetSelector { signs: vec![1; n_channels] }
    }

    pub fn from_signs(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(JostError::InvalidInput("sheet signs must be +1 or -1".into()));
        }
        Ok(SheetSelector { signs })
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn is_physical(&self) -> bool {
        self.signs.iter().all(|&s| s == 1)
    }

    /// k -> -k in every channel.
    pub fn flip_all(&self) -> Self {
        SheetSelector { signs: self.signs.iter().map(|s| -s).collect() }
    }

    /// Position in the binary enumeration order (physical sheet is 0).
    pub fn index(&self) -> usize {
        self.signs
            .iter()
            .enumerate()
            .fold(0, |acc, (c, &s)| if s < 0 { acc | 1 << c } else { acc })
    }
}

impl fmt::Display for SheetSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.signs {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl FromStr for SheetSelector {
    type Err = JostError;

    fn from_str(s: &str) -> Result<Self> {
        let signs: Vec<i8> = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(JostError::InvalidInput(format!(
                    "sheet string may only contain + and -, found {other:?}"
                ))),
            })
            .collect::<Result<_>>()?;
        SheetSelector::from_signs(signs)
    }
}

impl From<SheetSelector> for String {
    fn from(s: SheetSelector) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for SheetSelector {
    type Error = JostError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}
