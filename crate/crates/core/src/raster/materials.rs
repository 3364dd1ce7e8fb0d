use serde::{Deserialize, Serialize};

use super::{Phase, PhaseMap, RasterError};

/// Elastic and fracture properties of one phase, in N, mm, MPa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseProperties {
    /// Young's modulus, MPa.
    pub e: f64,
    pub nu: f64,
    /// Fracture energy, N/mm.
    pub gc: f64,
    /// Failure strength, MPa.
    pub sigma_u: f64,
}

impl PhaseProperties {
    pub fn validate(&self, phase: Phase) -> Result<(), RasterError> {
        let bad = |message: &str| Err(RasterError::InvalidProperties { phase, message: message.into() });
        if !(self.e > 0.0 && self.e.is_finite()) {
            return bad("E must be positive");
        }
        if !(0.0..0.5).contains(&self.nu) {
            return bad("nu must lie in [0, 0.5)");
        }
        if !(self.gc > 0.0 && self.gc.is_finite()) {
            return bad("Gc must be positive");
        }
        if !(self.sigma_u > 0.0 && self.sigma_u.is_finite()) {
            return bad("sigma_u must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaterialTable {
    pub matrix: Option<PhaseProperties>,
    pub itz: Option<PhaseProperties>,
    pub aggregate: Option<PhaseProperties>,
}

/// File form: moduli in GPa as tabulated, converted to MPa on load.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<PhaseFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    itz: Option<PhaseFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    aggregate: Option<PhaseFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseFile {
    #[serde(rename = "E_GPa")]
    e_gpa: f64,
    nu: f64,
    #[serde(rename = "Gc_N_per_mm")]
    gc: f64,
    #[serde(rename = "sigma_u_MPa")]
    sigma_u: f64,
}

impl MaterialTable {
    /// The reference concrete: mortar matrix, interfacial zone, inclusions.
    pub fn reference() -> Self {
        MaterialTable {
            matrix: Some(PhaseProperties { e: 28000.0, nu: 0.2, gc: 0.06, sigma_u: 4.0 }),
            itz: Some(PhaseProperties { e: 21900.0, nu: 0.2, gc: 0.02, sigma_u: 2.4 }),
            aggregate: Some(PhaseProperties { e: 72000.0, nu: 0.16, gc: 0.2, sigma_u: 20.0 }),
        }
    }

    pub fn get(&self, phase: Phase) -> Option<&PhaseProperties> {
        match phase {
            Phase::Matrix => self.matrix.as_ref(),
            Phase::Itz => self.itz.as_ref(),
            Phase::Aggregate => self.aggregate.as_ref(),
        }
    }

    pub fn require(&self, phase: Phase) -> Result<PhaseProperties, RasterError> {
        let p = *self.get(phase).ok_or(RasterError::MissingPhase(phase))?;
        p.validate(phase)?;
        Ok(p)
    }

    pub fn from_json(text: &str) -> Result<Self, RasterError> {
        let f: TableFile = serde_json::from_str(text).map_err(|e| RasterError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let conv = |p: Option<PhaseFile>| {
            p.map(|p| PhaseProperties { e: p.e_gpa * 1000.0, nu: p.nu, gc: p.gc, sigma_u: p.sigma_u })
        };
        Ok(MaterialTable { matrix: conv(f.matrix), itz: conv(f.itz), aggregate: conv(f.aggregate) })
    }

    pub fn to_json(&self) -> String {
        let conv = |p: Option<PhaseProperties>| {
            p.map(|p| PhaseFile { e_gpa: p.e / 1000.0, nu: p.nu, gc: p.gc, sigma_u: p.sigma_u })
        };
        let f = TableFile { matrix: conv(self.matrix), itz: conv(self.itz), aggregate: conv(self.aggregate) };
        let mut s = serde_json::to_string_pretty(&f).expect("material table serializes");
        s.push('\n');
        s
    }
}

/// Per-cell material channels, same layout as the phase map.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialFieldMaps {
    pub n: usize,
    pub e: Vec<f64>,
    pub nu: Vec<f64>,
    pub gc: Vec<f64>,
    pub sigma_u: Vec<f64>,
    pub phase: PhaseMap,
}

impl MaterialFieldMaps {
    pub fn properties(&self, cell: usize) -> PhaseProperties {
        PhaseProperties { e: self.e[cell], nu: self.nu[cell], gc: self.gc[cell], sigma_u: self.sigma_u[cell] }
    }
}

/// Every phase must have a record, whether or not it occurs in the map.
pub fn assign_materials(phase: &PhaseMap, table: &MaterialTable) -> Result<MaterialFieldMaps, RasterError> {
    let records = [
        table.require(Phase::Matrix)?,
        table.require(Phase::Itz)?,
        table.require(Phase::Aggregate)?,
    ];
    let cells = phase.labels.len();
    let mut maps = MaterialFieldMaps {
        n: phase.n,
        e: Vec::with_capacity(cells),
        nu: Vec::with_capacity(cells),
        gc: Vec::with_capacity(cells),
        sigma_u: Vec::with_capacity(cells),
        phase: phase.clone(),
    };
    for &p in &phase.labels {
        let r = records[p.code() as usize];
        maps.e.push(r.e);
        maps.nu.push(r.nu);
        maps.gc.push(r.gc);
        maps.sigma_u.push(r.sigma_u);
    }
    Ok(maps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_converts_units() {
        let t = MaterialTable::reference();
        let text = t.to_json();
        assert!(text.contains("\"E_GPa\": 21.9"));
        assert_eq!(MaterialTable::from_json(&text).unwrap(), t);
    }

    #[test]
    fn missing_phase_is_reported() {
        let t = MaterialTable { itz: None, ..MaterialTable::reference() };
        let map = PhaseMap::uniform(16, Phase::Matrix);
        match assign_materials(&map, &t) {
            Err(RasterError::MissingPhase(Phase::Itz)) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_poisson_ratio() {
        let mut t = MaterialTable::reference();
        t.matrix.as_mut().unwrap().nu = 0.5;
        assert!(matches!(t.require(Phase::Matrix), Err(RasterError::InvalidProperties { .. })));
    }

    #[test]
    fn unknown_key_rejected() {
        let err = MaterialTable::from_json("{\"matrix\": {\"E\": 1}}").unwrap_err();
        assert!(err.to_string().contains("unknown field"), "{err}");
    }
}
