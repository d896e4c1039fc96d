//! Achievable Rabi frequencies Ω₀ = |g|μ_B B₁ per host material.

use serde::{Deserialize, Serialize};

use super::table::{num, Table};
use crate::units::zeeman_rabi;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldLevels {
    /// Wire B₁ (low, high), T.
    pub wire: [f64; 2],
    /// SAW stray-field B₁ (low, high), T.
    pub saw: [f64; 2],
}

impl Default for FieldLevels {
    fn default() -> Self {
        Self { wire: [10e-3, 50e-3], saw: [50e-3, 100e-3] }
    }
}

impl FieldLevels {
    pub fn scaled(&self, f: f64) -> Self {
        Self { wire: [self.wire[0] * f, self.wire[1] * f], saw: [self.saw[0] * f, self.saw[1] * f] }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HostMaterial {
    pub name: &'static str,
    /// |g| range; equal ends for a single value.
    pub g: [f64; 2],
    /// Published Ω₀ endpoints (wire low, wire high, SAW low, SAW high), μeV.
    pub reference: [f64; 4],
}

pub const HOST_MATERIALS: [HostMaterial; 6] = [
    HostMaterial { name: "GaAs", g: [0.44, 0.44], reference: [0.3, 1.3, 1.3, 2.5] },
    HostMaterial { name: "InAs", g: [14.9, 14.9], reference: [8.6, 43.0, 43.0, 86.0] },
    HostMaterial { name: "InSb", g: [70.0, 70.0], reference: [41.0, 200.0, 200.0, 410.0] },
    HostMaterial { name: "DMS", g: [100.0, 1000.0], reference: [58.0, 2900.0, 290.0, 5800.0] },
    HostMaterial { name: "MoS2", g: [2.21, 2.21], reference: [1.3, 6.4, 6.4, 13.0] },
    HostMaterial { name: "WS2", g: [2.84, 2.84], reference: [1.6, 8.2, 8.2, 16.0] },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Implementation {
    Wire,
    Saw,
}

/// One table cell: the Ω₀ range of a material in one implementation.
#[derive(Debug, Clone, Serialize)]
pub struct Table1Cell {
    pub material: &'static str,
    pub implementation: Implementation,
    pub g: [f64; 2],
    pub b1_t: [f64; 2],
    pub rabi_uev: [f64; 2],
    pub reference_uev: [f64; 2],
    /// rabi / reference − 1 at each end.
    pub rel_dev: [f64; 2],
}

impl Table1Cell {
    pub fn within(&self, tol: f64) -> bool {
        self.rel_dev.iter().all(|d| d.abs() <= tol)
    }
}

/// Low end pairs the smallest |g| with the low field, high end the largest
/// |g| with the high field.
pub fn table1(levels: &FieldLevels) -> Vec<Table1Cell> {
    let mut out = Vec::with_capacity(12);
    for m in &HOST_MATERIALS {
        for (imp, b, r) in [
            (Implementation::Wire, levels.wire, [m.reference[0], m.reference[1]]),
            (Implementation::Saw, levels.saw, [m.reference[2], m.reference[3]]),
        ] {
            let rabi = [zeeman_rabi(m.g[0], b[0]), zeeman_rabi(m.g[1], b[1])];
            out.push(Table1Cell {
                material: m.name,
                implementation: imp,
                g: m.g,
                b1_t: b,
                rabi_uev: rabi,
                reference_uev: r,
                rel_dev: [rabi[0] / r[0] - 1.0, rabi[1] / r[1] - 1.0],
            });
        }
    }
    out
}

pub fn table1_csv(cells: &[Table1Cell]) -> Table {
    let mut t = Table::new(
        "table1",
        &[
            ("material", "-"),
            ("implementation", "-"),
            ("g_low", "1"),
            ("g_high", "1"),
            ("b1_low", "T"),
            ("b1_high", "T"),
            ("rabi_low", "ueV"),
            ("rabi_high", "ueV"),
            ("reference_low", "ueV"),
            ("reference_high", "ueV"),
            ("rel_dev_low", "1"),
            ("rel_dev_high", "1"),
        ],
    );
    for c in cells {
        let imp = match c.implementation {
            Implementation::Wire => "wire",
            Implementation::Saw => "saw",
        };
        t.push(vec![
            c.material.to_string(),
            imp.to_string(),
            num(c.g[0]),
            num(c.g[1]),
            num(c.b1_t[0]),
            num(c.b1_t[1]),
            num(c.rabi_uev[0]),
            num(c.rabi_uev[1]),
            num(c.reference_uev[0]),
            num(c.reference_uev[1]),
            num(c.rel_dev[0]),
            num(c.rel_dev[1]),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inas_and_ws2_cells() {
        let t = table1(&FieldLevels::default());
        let inas = t.iter().find(|c| c.material == "InAs" && c.implementation == Implementation::Wire).unwrap();
        assert!((inas.rabi_uev[0] - 8.6).abs() < 0.05 && (inas.rabi_uev[1] - 43.0).abs() < 0.2);
        let ws2 = t.iter().find(|c| c.material == "WS2" && c.implementation == Implementation::Saw).unwrap();
        assert!((ws2.rabi_uev[0] - 8.2).abs() < 0.05 && (ws2.rabi_uev[1] - 16.4).abs() < 0.1);
    }

    #[test]
    fn doubling_levels_doubles_cells() {
        let a = table1(&FieldLevels::default());
        let b = table1(&FieldLevels::default().scaled(2.0));
        for (x, y) in a.iter().zip(&b) {
            for i in 0..2 {
                assert!((y.rabi_uev[i] / x.rabi_uev[i] - 2.0).abs() < 1e-14);
            }
        }
    }
}
