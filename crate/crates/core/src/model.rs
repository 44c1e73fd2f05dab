//! Quality data and the preference system built from it.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scale {
    Metric,
    Ordinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CriterionSpec {
    pub name: String,
    pub scale: Scale,
    pub direction: Direction,
}

impl CriterionSpec {
    pub fn new(name: impl Into<String>, scale: Scale, direction: Direction) -> Self {
        Self {
            name: name.into(),
            scale,
            direction,
        }
    }

    pub fn metric(name: impl Into<String>) -> Self {
        Self::new(name, Scale::Metric, Direction::Maximize)
    }
}

/// Checks that `criteria` is nonempty and names are unique.
pub fn validate_criteria(criteria: &[CriterionSpec]) -> Result<()> {
    if criteria.is_empty() {
        return Err(Error::InvalidCriteria("at least one criterion is required".into()));
    }
    let mut seen = HashSet::new();
    for c in criteria {
        if !seen.insert(c.name.as_str()) {
            return Err(Error::InvalidCriteria(format!("duplicate criterion name `{}`", c.name)));
        }
    }
    Ok(())
}

/// Values of every criterion for every (classifier, data set) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityTable {
    classifiers: Vec<String>,
    datasets: Vec<String>,
    criteria: Vec<CriterionSpec>,
    values: Vec<f64>,
}

impl QualityTable {
    /// `values` is laid out classifier-major, then data set, then criterion.
    pub fn new(classifiers: Vec<String>, datasets: Vec<String>, criteria: Vec<CriterionSpec>, values: Vec<f64>) -> Result<Self> {
        validate_criteria(&criteria)?;
        if classifiers.len() < 2 {
            return Err(Error::InvalidTable("at least 2 classifiers are required".into()));
        }
        if datasets.is_empty() {
            return Err(Error::InvalidTable("at least 1 data set is required".into()));
        }
        for (kind, names) in [("classifier", &classifiers), ("data set", &datasets)] {
            let mut seen = HashSet::new();
            for n in names {
                if !seen.insert(n) {
                    return Err(Error::InvalidTable(format!("duplicate {kind} `{n}`")));
                }
            }
        }
        let expected = classifiers.len() * datasets.len() * criteria.len();
        if values.len() != expected {
            return Err(Error::InvalidTable(format!("expected {expected} values, got {}", values.len())));
        }
        let table = Self {
            classifiers,
            datasets,
            criteria,
            values,
        };
        for c in 0..table.num_classifiers() {
            for d in 0..table.num_datasets() {
                for k in 0..table.num_criteria() {
                    let v = table.value(c, d, k);
                    if !v.is_finite() {
                        return Err(Error::InvalidTable(format!(
                            "value for ({}, {}, {}) is not finite",
                            table.classifiers[c], table.datasets[d], table.criteria[k].name
                        )));
                    }
                }
            }
        }
        Ok(table)
    }

    pub fn from_fn(
        classifiers: Vec<String>,
        datasets: Vec<String>,
        criteria: Vec<CriterionSpec>,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(classifiers.len() * datasets.len() * criteria.len());
        for c in 0..classifiers.len() {
            for d in 0..datasets.len() {
                for k in 0..criteria.len() {
                    values.push(f(c, d, k));
                }
            }
        }
        Self::new(classifiers, datasets, criteria, values)
    }

    pub fn classifiers(&self) -> &[String] {
        &self.classifiers
    }

    pub fn datasets(&self) -> &[String] {
        &self.datasets
    }

    pub fn criteria(&self) -> &[CriterionSpec] {
        &self.criteria
    }

    pub fn num_classifiers(&self) -> usize {
        self.classifiers.len()
    }

    pub fn num_datasets(&self) -> usize {
        self.datasets.len()
    }

    pub fn num_criteria(&self) -> usize {
        self.criteria.len()
    }

    fn offset(&self, classifier: usize, dataset: usize) -> usize {
        (classifier * self.datasets.len() + dataset) * self.criteria.len()
    }

    pub fn value(&self, classifier: usize, dataset: usize, criterion: usize) -> f64 {
        self.values[self.offset(classifier, dataset) + criterion]
    }

    /// Stored values of one cell row, in criterion order.
    pub fn vector(&self, classifier: usize, dataset: usize) -> QualityVector {
        let start = self.offset(classifier, dataset);
        QualityVector::new(self.values[start..start + self.criteria.len()].to_vec())
    }

    /// One vector per data set for `classifier`.
    pub fn vectors_of(&self, classifier: usize) -> Vec<QualityVector> {
        (0..self.num_datasets()).map(|d| self.vector(classifier, d)).collect()
    }

    pub fn classifier_index(&self, name: &str) -> Result<usize> {
        self.classifiers
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownClassifier(name.to_string()))
    }

    /// Sub-table restricted to the given classifiers, in the given order.
    pub fn select_classifiers(&self, indices: &[usize]) -> Result<Self> {
        let names = indices.iter().map(|&i| self.classifiers[i].clone()).collect();
        Self::from_fn(names, self.datasets.clone(), self.criteria.clone(), |c, d, k| {
            self.value(indices[c], d, k)
        })
    }

    /// Same values with different criterion metadata (same count and order).
    pub fn with_criteria(&self, criteria: Vec<CriterionSpec>) -> Result<Self> {
        if criteria.len() != self.criteria.len() {
            return Err(Error::InvalidCriteria(format!(
                "expected {} criteria, got {}",
                self.criteria.len(),
                criteria.len()
            )));
        }
        Self::new(self.classifiers.clone(), self.datasets.clone(), criteria, self.values.clone())
    }

    /// Same table with values rewritten by `f(classifier, dataset, criterion, value)`.
    pub fn map_values(&self, mut f: impl FnMut(usize, usize, usize, f64) -> f64) -> Result<Self> {
        Self::from_fn(self.classifiers.clone(), self.datasets.clone(), self.criteria.clone(), |c, d, k| {
            f(c, d, k, self.value(c, d, k))
        })
    }
}

/// Negates minimize-type criteria so that larger is better everywhere.
pub fn reorient(table: &QualityTable) -> QualityTable {
    let flip: Vec<bool> = table.criteria.iter().map(|c| c.direction == Direction::Minimize).collect();
    let values = table
        .values
        .chunks(table.criteria.len())
        .flat_map(|row| row.iter().zip(&flip).map(|(&v, &f)| if f { -v } else { v }))
        .collect();
    let criteria = table
        .criteria
        .iter()
        .map(|c| CriterionSpec {
            direction: Direction::Maximize,
            ..c.clone()
        })
        .collect();
    QualityTable {
        classifiers: table.classifiers.clone(),
        datasets: table.datasets.clone(),
        criteria,
        values,
    }
}

/// A point of the quality space, oriented so that larger is better.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityVector {
    coords: Vec<f64>,
}

impl QualityVector {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Componentwise `self >= other`.
    pub fn weakly_dominates(&self, other: &Self) -> bool {
        self.coords.iter().zip(&other.coords).all(|(a, b)| a >= b)
    }

    fn key(&self) -> Vec<u64> {
        // +0.0 and -0.0 compare equal and must deduplicate together.
        self.coords.iter().map(|&x| if x == 0.0 { 0 } else { x.to_bits() }).collect()
    }
}

impl From<Vec<f64>> for QualityVector {
    fn from(coords: Vec<f64>) -> Self {
        Self::new(coords)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemOptions {
    /// Metric distances are snapped to multiples of this value before they
    /// are compared, so that differences which are equal in decimal but not
    /// in binary floating point are treated as equal. Zero compares raw
    /// doubles.
    pub distance_resolution: f64,
    /// Keep only the ordinal information: R2 is reduced to its reflexive
    /// part and dominance becomes first-order stochastic dominance.
    pub ordinal_only: bool,
}

impl Default for SystemOptions {
    fn default() -> Self {
        Self {
            distance_resolution: 1e-9,
            ordinal_only: false,
        }
    }
}

/// The preference system `[Q, R1, R2]` on a finite set of quality vectors.
///
/// Element 0 is the bottom and element 1 the top, unless all vectors
/// coincide, in which case the single element is both.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceSystem {
    elements: Vec<QualityVector>,
    scales: Vec<Scale>,
    metric_dims: Vec<usize>,
    bottom: usize,
    top: usize,
    r2_active: bool,
    resolution: f64,
    lookup: HashMap<Vec<u64>, usize>,
}

impl PreferenceSystem {
    pub fn elements(&self) -> &[QualityVector] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn scales(&self) -> &[Scale] {
        &self.scales
    }

    pub fn metric_dims(&self) -> &[usize] {
        &self.metric_dims
    }

    /// False when R2 carries no information beyond reflexivity.
    pub fn has_cardinal_part(&self) -> bool {
        self.r2_active
    }

    pub fn index_of(&self, v: &QualityVector) -> Option<usize> {
        self.lookup.get(&v.key()).copied()
    }

    /// `(i, j) in R1`: element i is componentwise at least element j.
    pub fn r1(&self, i: usize, j: usize) -> bool {
        self.elements[i].weakly_dominates(&self.elements[j])
    }

    /// All pairs of R1, reflexive ones included.
    pub fn r1_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.r1(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Snapped metric distances `d_k(q_k, p_k)` of the pair `(i, j)`.
    pub fn distance_key(&self, i: usize, j: usize) -> Vec<f64> {
        let (a, b) = (self.elements[i].coords(), self.elements[j].coords());
        self.metric_dims
            .iter()
            .map(|&k| {
                let d = (a[k] - b[k]).abs();
                if self.resolution > 0.0 {
                    (d / self.resolution).round()
                } else {
                    d
                }
            })
            .collect()
    }

    /// `((q, p), (r, s)) in R2`.
    pub fn r2(&self, first: (usize, usize), second: (usize, usize)) -> bool {
        if !self.r1(first.0, first.1) || !self.r1(second.0, second.1) {
            return false;
        }
        if !self.r2_active {
            return first == second;
        }
        let a = self.distance_key(first.0, first.1);
        let b = self.distance_key(second.0, second.1);
        a.iter().zip(&b).all(|(x, y)| x >= y)
    }

    /// All pairs of R2. Quadratic in the size of R1; meant for small systems.
    pub fn r2_pairs(&self) -> Vec<((usize, usize), (usize, usize))> {
        let r1 = self.r1_pairs();
        let mut out = Vec::new();
        for &a in &r1 {
            for &b in &r1 {
                if self.r2(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// Builds the preference system on the deduplicated `vectors` plus the
/// componentwise extremes.
pub fn build_system(vectors: &[QualityVector], criteria: &[CriterionSpec], options: &SystemOptions) -> Result<PreferenceSystem> {
    validate_criteria(criteria)?;
    let Some(first) = vectors.first() else {
        return Err(Error::Precondition("cannot build a preference system from zero vectors".into()));
    };
    let dims = criteria.len();
    for v in vectors {
        if v.len() != dims {
            return Err(Error::InvalidTable(format!("vector has {} coordinates, expected {dims}", v.len())));
        }
        if v.coords().iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidTable("quality vectors must be finite".into()));
        }
    }
    if !(options.distance_resolution >= 0.0 && options.distance_resolution.is_finite()) {
        return Err(Error::InvalidConfig("distance resolution must be finite and non-negative".into()));
    }
    let mut lo = first.coords().to_vec();
    let mut hi = first.coords().to_vec();
    for v in vectors {
        for (k, &x) in v.coords().iter().enumerate() {
            lo[k] = lo[k].min(x);
            hi[k] = hi[k].max(x);
        }
    }
    let bottom = QualityVector::new(lo);
    let top = QualityVector::new(hi);
    let mut elements = vec![bottom.clone()];
    let mut lookup = HashMap::new();
    lookup.insert(bottom.key(), 0);
    if lookup.insert(top.key(), 1).is_none() {
        elements.push(top);
    }
    for v in vectors {
        let key = v.key();
        if !lookup.contains_key(&key) {
            lookup.insert(key, elements.len());
            elements.push(v.clone());
        }
    }
    let scales: Vec<Scale> = criteria.iter().map(|c| c.scale).collect();
    let metric_dims: Vec<usize> = (0..dims).filter(|&k| scales[k] == Scale::Metric).collect();
    let top_index = if elements.len() > 1 { 1 } else { 0 };
    Ok(PreferenceSystem {
        r2_active: !options.ordinal_only && !metric_dims.is_empty(),
        elements,
        scales,
        metric_dims,
        bottom: 0,
        top: top_index,
        resolution: options.distance_resolution,
        lookup,
    })
}

/// `P_R`: pairs of `rel` whose reverse is absent.
pub fn strict_part<T: Copy + Eq + Hash>(rel: &HashSet<(T, T)>) -> HashSet<(T, T)> {
    rel.iter().copied().filter(|&(a, b)| !rel.contains(&(b, a))).collect()
}

/// `I_R`: pairs of `rel` whose reverse is present.
pub fn indifference_part<T: Copy + Eq + Hash>(rel: &HashSet<(T, T)>) -> HashSet<(T, T)> {
    rel.iter().copied().filter(|&(a, b)| rel.contains(&(b, a))).collect()
}

/// Order-preserving transform of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub enum DimTransform {
    /// `x -> scale * x + shift` with `scale > 0`.
    Affine { scale: f64, shift: f64 },
    /// Strictly increasing relabelling given as `(from, to)` pairs; only
    /// valid on ordinal criteria and only for the listed values.
    Relabel(Vec<(f64, f64)>),
}

impl DimTransform {
    fn apply(&self, x: f64) -> Option<f64> {
        match self {
            DimTransform::Affine { scale, shift } => Some(scale * x + shift),
            DimTransform::Relabel(map) => map.iter().find(|(from, _)| *from == x).map(|&(_, to)| to),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Automorphism {
    pub transforms: Vec<DimTransform>,
}

impl Automorphism {
    pub fn identity(dims: usize) -> Self {
        Self {
            transforms: vec![DimTransform::Affine { scale: 1.0, shift: 0.0 }; dims],
        }
    }

    fn validate(&self, scales: &[Scale]) -> Result<()> {
        if self.transforms.len() != scales.len() {
            return Err(Error::InvalidAutomorphism {
                criterion: self.transforms.len().min(scales.len()),
                reason: format!("expected {} transforms, got {}", scales.len(), self.transforms.len()),
            });
        }
        for (k, (t, scale)) in self.transforms.iter().zip(scales).enumerate() {
            match t {
                DimTransform::Affine { scale: a, shift } => {
                    if !(*a > 0.0 && a.is_finite() && shift.is_finite()) {
                        return Err(Error::InvalidAutomorphism {
                            criterion: k,
                            reason: format!("scale must be positive and finite, got {a}"),
                        });
                    }
                }
                DimTransform::Relabel(map) => {
                    if *scale == Scale::Metric {
                        return Err(Error::InvalidAutomorphism {
                            criterion: k,
                            reason: "relabelling does not preserve metric distances".into(),
                        });
                    }
                    let mut sorted = map.clone();
                    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                    if sorted.windows(2).any(|w| w[0].0 >= w[1].0 || w[0].1 >= w[1].1) {
                        return Err(Error::InvalidAutomorphism {
                            criterion: k,
                            reason: "relabelling must be strictly increasing".into(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_vector(&self, v: &QualityVector) -> Result<QualityVector> {
        let coords = v
            .coords()
            .iter()
            .zip(&self.transforms)
            .enumerate()
            .map(|(k, (&x, t))| {
                t.apply(x).ok_or_else(|| Error::InvalidAutomorphism {
                    criterion: k,
                    reason: format!("value {x} is not covered by the relabelling"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(QualityVector::new(coords))
    }
}

/// Rebuilds `sys` on the transformed elements. Element indices are preserved.
pub fn apply_automorphism(sys: &PreferenceSystem, t: &Automorphism) -> Result<PreferenceSystem> {
    t.validate(&sys.scales)?;
    let transformed = sys.elements.iter().map(|v| t.apply_vector(v)).collect::<Result<Vec<_>>>()?;
    let criteria: Vec<CriterionSpec> = sys
        .scales
        .iter()
        .enumerate()
        .map(|(k, &scale)| CriterionSpec::new(format!("c{k}"), scale, Direction::Maximize))
        .collect();
    let options = SystemOptions {
        distance_resolution: sys.resolution,
        ordinal_only: !sys.r2_active && !sys.metric_dims.is_empty(),
    };
    build_system(&transformed, &criteria, &options)
}
