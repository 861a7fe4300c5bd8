//! Scenario files: one JSON document bundling a lattice, named classes,
//! a polystable decomposition, stability functions and budgets.

use std::fmt;
use std::marker::PhantomData;

use bridgeland_local::ext_quiver::{build_ext_quiver, DimensionVector, ExtQuiver, PolystableDecomposition, Summand};
use bridgeland_local::lattice::{GramLattice, LatticeVector};
use bridgeland_local::matrix::Matrix;
use bridgeland_local::quiver_rep::DoubleQuiverRep;
use bridgeland_local::rational::{serde_q, Rational};
use bridgeland_local::stability::{IntPolynomial, StabilityFunction, WeightedFiltration};
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Name-keyed entries in file order. Duplicate names are rejected on input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Named<T>(pub Vec<(String, T)>);

impl<T> Default for Named<T> {
    fn default() -> Self {
        Named(Vec::new())
    }
}

impl<T> Named<T> {
    pub fn get(&self, name: &str) -> Option<&T> {
        self.0.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<T: Serialize> Serialize for Named<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Named<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct NamedVisitor<T>(PhantomData<T>);

        impl<'de, T: Deserialize<'de>> Visitor<'de> for NamedVisitor<T> {
            type Value = Named<T>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object keyed by name")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Named<T>, A::Error> {
                let mut out: Vec<(String, T)> = Vec::new();
                while let Some(key) = map.next_key::<String>()? {
                    if out.iter().any(|(k, _)| *k == key) {
                        return Err(serde::de::Error::custom(format!("duplicate name `{key}`")));
                    }
                    let value = map.next_value()?;
                    out.push((key, value));
                }
                Ok(Named(out))
            }
        }

        d.deserialize_map(NamedVisitor(PhantomData))
    }
}

/// A class given by name or by coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassRef {
    Name(String),
    Coords(LatticeVector),
}

impl fmt::Display for ClassRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassRef::Name(n) => f.write_str(n),
            ClassRef::Coords(c) => write!(f, "{:?}", c.coords()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummandSpec {
    pub class: ClassRef,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    pub weight: i64,
    pub class: ClassRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    pub root_budget: usize,
    pub search_budget: usize,
    pub box_bound: u32,
    pub prng_seed: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            root_budget: 100_000,
            search_budget: 20_000,
            box_bound: 6,
            prng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepSpec {
    pub x: Vec<Matrix>,
    pub y: Vec<Matrix>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalWeightSpec {
    /// `(w_j, P_j)` pairs; `P_j` has its constant term first.
    pub terms: Vec<(i64, IntPolynomial)>,
    pub ell: i64,
}

/// `H` either as its own 2×2 Gram matrix or spanned by two classes of the
/// scenario lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperbolicSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<[ClassRef; 2]>,
    pub v: ClassRef,
    /// Name of the stability function used for effectivity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QVec(#[serde(with = "serde_q::vec")] pub Vec<Rational>);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub lattice: GramLattice,
    #[serde(default, skip_serializing_if = "Named::is_empty")]
    pub vectors: Named<LatticeVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Vec<SummandSpec>>,
    #[serde(default, skip_serializing_if = "Named::is_empty")]
    pub stability: Named<StabilityFunction>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quiver: Option<ExtQuiver>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<DimensionVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representation: Option<RepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<QVec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filtration: Option<Vec<StepSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subobjects: Option<Vec<ClassRef>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical_weight: Option<ClassicalWeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyperbolic: Option<HyperbolicSpec>,
    /// Stability function whose value at `v` plays the role of `Z_0(v)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<DimensionVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemaViolation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for SchemaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    file: ScenarioFile,
    decomposition: Option<PolystableDecomposition>,
}

pub fn load_scenario(text: &str) -> Result<Scenario, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Schema(vec![SchemaViolation {
            path: if path.is_empty() { ".".into() } else { path },
            message: e.into_inner().to_string(),
        }])
    })?;
    Scenario::from_file(file)
}

pub fn load_scenario_file(path: &std::path::Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    load_scenario(&text)
}

impl Scenario {
    pub fn from_file(file: ScenarioFile) -> Result<Self, CliError> {
        let mut violations = Vec::new();
        let mut flag = |path: String, message: String| violations.push(SchemaViolation { path, message });
        let rank = file.lattice.rank();

        for (name, v) in &file.vectors.0 {
            if v.len() != rank {
                flag(format!("vectors.{name}"), format!("length {} differs from lattice rank {rank}", v.len()));
            }
        }
        for (name, z) in &file.stability.0 {
            if z.rank() != rank {
                flag(format!("stability.{name}"), format!("{} values for lattice rank {rank}", z.rank()));
            }
        }
        let resolve = |r: &ClassRef| -> Result<LatticeVector, String> {
            let v = match r {
                ClassRef::Name(n) => file.vectors.get(n).cloned().ok_or_else(|| format!("unknown vector `{n}`"))?,
                ClassRef::Coords(c) => c.clone(),
            };
            if v.len() != rank {
                return Err(format!("length {} differs from lattice rank {rank}", v.len()));
            }
            Ok(v)
        };

        let mut decomposition = None;
        if let Some(specs) = &file.decomposition {
            let mut summands = Vec::new();
            for (i, s) in specs.iter().enumerate() {
                match resolve(&s.class) {
                    Ok(class) => summands.push(Summand {
                        class,
                        multiplicity: s.multiplicity,
                    }),
                    Err(m) => flag(format!("decomposition[{i}].class"), m),
                }
            }
            if summands.len() == specs.len() {
                match PolystableDecomposition::new(file.lattice.clone(), summands) {
                    Ok(d) => decomposition = Some(d),
                    Err(e) => flag("decomposition".into(), e.to_string()),
                }
            }
        }
        for (i, step) in file.filtration.iter().flatten().enumerate() {
            if let Err(m) = resolve(&step.class) {
                flag(format!("filtration[{i}].class"), m);
            }
        }
        for (i, r) in file.subobjects.iter().flatten().enumerate() {
            if let Err(m) = resolve(r) {
                flag(format!("subobjects[{i}]"), m);
            }
        }
        let stability_name = |path: String, name: &str, flag: &mut dyn FnMut(String, String)| {
            if file.stability.get(name).is_none() {
                flag(path, format!("unknown stability function `{name}`"));
            }
        };
        if let Some(r) = &file.reference {
            stability_name("reference".into(), r, &mut flag);
        }
        for (i, s) in file.samples.iter().flatten().enumerate() {
            stability_name(format!("samples[{i}]"), s, &mut flag);
        }
        if let Some(h) = &file.hyperbolic {
            match (&h.gram, &h.basis) {
                (Some(_), None) => {
                    if let ClassRef::Name(n) = &h.v {
                        flag("hyperbolic.v".into(), format!("`{n}`: give coordinates in H when H has its own Gram matrix"));
                    }
                }
                (None, Some(basis)) => {
                    for (k, b) in basis.iter().chain([&h.v]).enumerate() {
                        if let Err(m) = resolve(b) {
                            let at = if k < 2 { format!("hyperbolic.basis[{k}]") } else { "hyperbolic.v".into() };
                            flag(at, m);
                        }
                    }
                }
                _ => flag("hyperbolic".into(), "exactly one of `gram` and `basis` is required".into()),
            }
            if let Some(z) = &h.z0 {
                stability_name("hyperbolic.z0".into(), z, &mut flag);
            }
        }

        let vertex_count = file
            .quiver
            .as_ref()
            .map(ExtQuiver::vertex_count)
            .or(decomposition.as_ref().map(PolystableDecomposition::len));
        if let (Some(n), Some(s)) = (&file.n, vertex_count) {
            if n.len() != s {
                flag("n".into(), format!("length {} for {s} vertices", n.len()));
            }
        }
        if let (Some(t), Some(s)) = (&file.theta, vertex_count) {
            if t.0.len() != s {
                flag("theta".into(), format!("length {} for {s} vertices", t.0.len()));
            }
        }
        if let (Some(a), Some(s)) = (&file.alpha, vertex_count) {
            if a.len() != s {
                flag("alpha".into(), format!("length {} for {s} vertices", a.len()));
            }
        }
        let scenario = Scenario { file, decomposition };
        if violations.is_empty() {
            if let Some(spec) = &scenario.file.representation {
                if let Err(e) = scenario.build_rep(spec) {
                    violations.push(SchemaViolation {
                        path: "representation".into(),
                        message: e.to_string(),
                    });
                }
            }
        }
        if violations.is_empty() {
            Ok(scenario)
        } else {
            Err(CliError::Schema(violations))
        }
    }

    pub fn file(&self) -> &ScenarioFile {
        &self.file
    }

    pub fn lattice(&self) -> &GramLattice {
        &self.file.lattice
    }

    pub fn budgets(&self) -> &Budgets {
        &self.file.budgets
    }

    /// Canonical JSON (sorted keys, normalized rationals).
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(&self.file).expect("scenario serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn resolve(&self, r: &ClassRef) -> Result<LatticeVector, CliError> {
        let v = match r {
            ClassRef::Name(n) => self
                .file
                .vectors
                .get(n)
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("unknown vector `{n}`")))?,
            ClassRef::Coords(c) => c.clone(),
        };
        self.lattice().check(&v).map_err(|e| CliError::Usage(format!("{r}: {e}")))?;
        Ok(v)
    }

    /// A command-line argument naming a vector, or inline coordinates such as `[1,0,-1]`.
    pub fn vector_arg(&self, arg: &str) -> Result<LatticeVector, CliError> {
        if arg.trim_start().starts_with('[') {
            let coords: Vec<i64> = serde_json::from_str(arg).map_err(|e| CliError::Usage(format!("bad coordinates `{arg}`: {e}")))?;
            self.resolve(&ClassRef::Coords(LatticeVector::new(coords)))
        } else {
            self.resolve(&ClassRef::Name(arg.to_string()))
        }
    }

    pub fn stability(&self, name: &str) -> Result<&StabilityFunction, CliError> {
        self.file
            .stability
            .get(name)
            .ok_or_else(|| CliError::Usage(format!("unknown stability function `{name}`")))
    }

    pub fn decomposition(&self) -> Result<&PolystableDecomposition, CliError> {
        self.decomposition.as_ref().ok_or_else(|| missing("decomposition"))
    }

    /// The declared quiver, or the ext-quiver of the decomposition.
    pub fn quiver(&self) -> Result<ExtQuiver, CliError> {
        match (&self.file.quiver, &self.decomposition) {
            (Some(q), _) => Ok(q.clone()),
            (None, Some(d)) => Ok(build_ext_quiver(d)),
            (None, None) => Err(missing("quiver or decomposition")),
        }
    }

    /// The declared dimension vector, or the multiplicities of the decomposition.
    pub fn n(&self) -> Result<DimensionVector, CliError> {
        match (&self.file.n, &self.decomposition) {
            (Some(n), _) => Ok(n.clone()),
            (None, Some(d)) => Ok(d.multiplicities()),
            (None, None) => Err(missing("n or decomposition")),
        }
    }

    fn build_rep(&self, spec: &RepSpec) -> Result<DoubleQuiverRep, CliError> {
        DoubleQuiverRep::new(self.quiver()?, self.n()?, spec.x.clone(), spec.y.clone()).map_err(|e| CliError::domain("representation", e))
    }

    pub fn representation(&self) -> Result<DoubleQuiverRep, CliError> {
        let spec = self.file.representation.as_ref().ok_or_else(|| missing("representation"))?;
        self.build_rep(spec)
    }

    pub fn theta(&self) -> Result<Vec<Rational>, CliError> {
        self.file.theta.as_ref().map(|t| t.0.clone()).ok_or_else(|| missing("theta"))
    }

    pub fn filtration(&self) -> Result<WeightedFiltration, CliError> {
        let steps = self.file.filtration.as_ref().ok_or_else(|| missing("filtration"))?;
        let steps = steps
            .iter()
            .map(|s| Ok((s.weight, self.resolve(&s.class)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        WeightedFiltration::new(steps).map_err(|e| CliError::domain("filtration", e))
    }

    pub fn subobjects(&self) -> Result<Vec<LatticeVector>, CliError> {
        let refs = self.file.subobjects.as_ref().ok_or_else(|| missing("subobjects"))?;
        refs.iter().map(|r| self.resolve(r)).collect()
    }
}

fn missing(what: &str) -> CliError {
    CliError::Usage(format!("scenario has no {what}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario() {
        let s = load_scenario(r#"{"lattice": {"gram": [[2]]}, "vectors": {"v": [1]}}"#).unwrap();
        assert_eq!(s.vector_arg("v").unwrap(), LatticeVector::new(vec![1]));
        assert_eq!(s.vector_arg("[3]").unwrap(), LatticeVector::new(vec![3]));
    }

    #[test]
    fn wrong_vector_length_names_the_vector() {
        let Err(CliError::Schema(v)) = load_scenario(r#"{"lattice": {"gram": [[2]]}, "vectors": {"v": [1, 0]}}"#) else {
            panic!("expected a schema violation");
        };
        assert_eq!(v[0].path, "vectors.v");
    }

    #[test]
    fn duplicate_names_are_violations() {
        let Err(CliError::Schema(v)) = load_scenario(r#"{"lattice": {"gram": [[2]]}, "vectors": {"v": [1], "v": [2]}}"#) else {
            panic!("expected a schema violation");
        };
        assert!(v[0].message.contains("duplicate name `v`"), "{v:?}");
        assert_eq!(v[0].path, "vectors");
    }

    #[test]
    fn unknown_fields_and_bad_json_are_violations() {
        assert!(matches!(load_scenario(r#"{"lattice": {"gram": [[2]]}, "vectorz": {}}"#), Err(CliError::Schema(_))));
        assert!(matches!(load_scenario("{"), Err(CliError::Schema(_))));
        assert!(matches!(load_scenario(r#"{"lattice": {"gram": [[1, 2], [3, 1]]}}"#), Err(CliError::Schema(_))));
    }

    #[test]
    fn decomposition_refs_are_checked() {
        let text = r#"{"lattice": {"gram": [[-2, 2], [2, -2]]}, "vectors": {"a": [1, 0]},
            "decomposition": [{"class": "a", "multiplicity": 1}, {"class": "b", "multiplicity": 1}]}"#;
        let Err(CliError::Schema(v)) = load_scenario(text) else {
            panic!("expected a schema violation");
        };
        assert_eq!(v[0].path, "decomposition[1].class");
    }

    #[test]
    fn round_trip_and_digest() {
        let text = r#"{"lattice": {"gram": [[-2, 2], [2, -2]]}, "vectors": {"a": [1, 0], "b": [0, 1]},
            "decomposition": [{"class": "a", "multiplicity": 1}, {"class": "b", "multiplicity": 1}],
            "stability": {"Z0": [{"re": "0", "im": "1/2"}, {"re": 0, "im": "2/4"}]},
            "theta": ["1", "-1"]}"#;
        let s = load_scenario(text).unwrap();
        let again = load_scenario(&serde_json::to_string(s.file()).unwrap()).unwrap();
        assert_eq!(s, again);
        assert_eq!(s.digest(), again.digest());
        assert_eq!(s.digest().len(), 64);
    }
}
