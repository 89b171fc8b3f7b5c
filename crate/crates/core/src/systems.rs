//! Generative discrete-time systems `x_{k+1} ~ T(· | x_k)`, `y_k = H(x_k)`.
//!
//! Every system draws its initial state from a declared distribution, steps
//! with a possibly random kernel, and labels states through a total output
//! map whose level sets partition the state space.
//!
//! Systems only need to be measurable in the usual sense: the probability of
//! any set of trajectories must be well defined. The closed-form systems
//! below satisfy this trivially.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::alphabet::{Alphabet, Letter};
use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::NORMALIZATION_TOLERANCE;

/// A stochastic or deterministic system with a finite output alphabet.
pub trait DynamicalSystem {
    type State: Clone;

    fn alphabet(&self) -> &Alphabet;

    /// Number of coordinates used to export a state.
    fn dimension(&self) -> usize;

    fn sample_initial(&self, rng: &mut RandomStream) -> Self::State;

    /// Deterministic systems ignore `rng`.
    fn step(&self, state: &Self::State, rng: &mut RandomStream) -> Self::State;

    fn output(&self, state: &Self::State) -> Letter;

    /// Writes the state's coordinates into `out`, which has `dimension()` slots.
    fn coordinates(&self, state: &Self::State, out: &mut [f64]);
}

/// Initial distribution of a one-dimensional system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarInitial {
    Uniform { low: f64, high: f64 },
    Point(f64),
}

impl ScalarInitial {
    fn sample(&self, rng: &mut RandomStream) -> f64 {
        match *self {
            ScalarInitial::Uniform { low, high } => rng.uniform_in(low, high),
            ScalarInitial::Point(x) => x,
        }
    }

    fn validate(&self, low: f64, high: f64, system: &str) -> Result<()> {
        let inside = |x: f64| x.is_finite() && x >= low && x < high;
        let ok = match *self {
            ScalarInitial::Uniform { low: a, high: b } => {
                inside(a) && b.is_finite() && a < b && b <= high
            }
            ScalarInitial::Point(x) => inside(x),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "{system} initial distribution {self:?} leaves the state space [{low}, {high})"
            )))
        }
    }
}

/// Initial distribution of a planar system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PlanarInitial {
    /// Uniform on the axis-aligned box `[low, high]`.
    Box {
        low: [f64; 2],
        high: [f64; 2],
    },
    Point([f64; 2]),
}

/// Circle rotation `x ↦ x + θ mod 2π` labelled `0` on `[0, θ)` and `1` elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct Sturmian {
    theta: f64,
    initial: ScalarInitial,
    alphabet: Alphabet,
}

impl Sturmian {
    /// `2π(√2 − 1)`, an irrational fraction of the circle.
    pub const DEFAULT_THETA: f64 = TAU * (core::f64::consts::SQRT_2 - 1.0);

    pub fn new(theta: f64, initial: ScalarInitial) -> Result<Self> {
        if !(theta > 0.0 && theta < TAU) {
            return Err(Error::invalid(format!(
                "sturmian theta {theta} must lie in (0, 2π)"
            )));
        }
        initial.validate(0.0, TAU, "sturmian")?;
        Ok(Self {
            theta,
            initial,
            alphabet: Alphabet::numbered(2)?,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn initial(&self) -> ScalarInitial {
        self.initial
    }

    pub fn rotate(&self, x: f64) -> f64 {
        // 0 < θ < 2π, so one subtraction always suffices.
        let y = x + self.theta;
        if y >= TAU {
            y - TAU
        } else {
            y
        }
    }

    pub fn label(&self, x: f64) -> Letter {
        if x < self.theta {
            0
        } else {
            1
        }
    }
}

impl Default for Sturmian {
    fn default() -> Self {
        Self::new(
            Self::DEFAULT_THETA,
            ScalarInitial::Uniform {
                low: 0.0,
                high: TAU,
            },
        )
        .expect("valid defaults")
    }
}

impl DynamicalSystem for Sturmian {
    type State = f64;

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn dimension(&self) -> usize {
        1
    }

    fn sample_initial(&self, rng: &mut RandomStream) -> f64 {
        self.initial.sample(rng)
    }

    fn step(&self, x: &f64, _rng: &mut RandomStream) -> f64 {
        self.rotate(*x)
    }

    fn output(&self, x: &f64) -> Letter {
        self.label(*x)
    }

    fn coordinates(&self, x: &f64, out: &mut [f64]) {
        out[0] = *x;
    }
}

/// Planar system that applies `A1` with probability `p` and `A2` otherwise.
///
/// The output map has nine cells: `0` is the open unit disk, `1..=4` split
/// the annulus `1 ≤ |x| < 2` by quadrant and `5..=8` split `|x| ≥ 2` by
/// quadrant. Quadrants are numbered counter-clockwise from `x ≥ 0, y ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SwitchedLinear {
    a1: [[f64; 2]; 2],
    a2: [[f64; 2]; 2],
    p: f64,
    initial: PlanarInitial,
    alphabet: Alphabet,
}

impl SwitchedLinear {
    const COS_PI_6: f64 = 0.866_025_403_784_438_6;
    const SIN_PI_6: f64 = 0.5;

    /// Clockwise rotation by π/6.
    pub const DEFAULT_A1: [[f64; 2]; 2] = [
        [Self::COS_PI_6, Self::SIN_PI_6],
        [-Self::SIN_PI_6, Self::COS_PI_6],
    ];
    pub const DEFAULT_A2: [[f64; 2]; 2] = [[1.02, 0.0], [0.0, 0.5]];
    pub const DEFAULT_INITIAL: PlanarInitial = PlanarInitial::Box {
        low: [-2.0, -2.0],
        high: [2.0, 2.0],
    };

    pub fn new(
        a1: [[f64; 2]; 2],
        a2: [[f64; 2]; 2],
        p: f64,
        initial: PlanarInitial,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!(
                "switch probability {p} must lie in [0, 1]"
            )));
        }
        if a1.iter().chain(a2.iter()).flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("switched system matrices must be finite"));
        }
        let valid = match initial {
            PlanarInitial::Box { low, high } => {
                (0..2).all(|i| low[i].is_finite() && high[i].is_finite() && low[i] <= high[i])
            }
            PlanarInitial::Point(x) => x.iter().all(|v| v.is_finite()),
        };
        if !valid {
            return Err(Error::invalid(format!(
                "switched system initial distribution {initial:?} is not a finite box or point"
            )));
        }
        Ok(Self {
            a1,
            a2,
            p,
            initial,
            alphabet: Alphabet::numbered(9)?,
        })
    }

    pub fn switch_probability(&self) -> f64 {
        self.p
    }

    pub fn matrices(&self) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
        (self.a1, self.a2)
    }

    pub fn initial(&self) -> PlanarInitial {
        self.initial
    }

    pub fn apply(m: &[[f64; 2]; 2], x: &[f64; 2]) -> [f64; 2] {
        [
            m[0][0] * x[0] + m[0][1] * x[1],
            m[1][0] * x[0] + m[1][1] * x[1],
        ]
    }

    pub fn label(x: &[f64; 2]) -> Letter {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2 < 1.0 {
            return 0;
        }
        let quadrant = match (x[0] >= 0.0, x[1] >= 0.0) {
            (true, true) => 0,
            (false, true) => 1,
            (false, false) => 2,
            (true, false) => 3,
        };
        if r2 < 4.0 {
            1 + quadrant
        } else {
            5 + quadrant
        }
    }
}

impl Default for SwitchedLinear {
    fn default() -> Self {
        Self::new(
            Self::DEFAULT_A1,
            Self::DEFAULT_A2,
            0.5,
            Self::DEFAULT_INITIAL,
        )
        .expect("valid defaults")
    }
}

impl DynamicalSystem for SwitchedLinear {
    type State = [f64; 2];

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn dimension(&self) -> usize {
        2
    }

    fn sample_initial(&self, rng: &mut RandomStream) -> [f64; 2] {
        match self.initial {
            PlanarInitial::Box { low, high } => [
                rng.uniform_in(low[0], high[0]),
                rng.uniform_in(low[1], high[1]),
            ],
            PlanarInitial::Point(x) => x,
        }
    }

    fn step(&self, x: &[f64; 2], rng: &mut RandomStream) -> [f64; 2] {
        if rng.bernoulli(self.p) {
            Self::apply(&self.a1, x)
        } else {
            Self::apply(&self.a2, x)
        }
    }

    fn output(&self, x: &[f64; 2]) -> Letter {
        Self::label(x)
    }

    fn coordinates(&self, x: &[f64; 2], out: &mut [f64]) {
        out.copy_from_slice(x);
    }
}

/// Two-cell map on `[0, 2)` whose memory-1 abstraction has spurious words.
///
/// Cell `a = [0, 1)`, cell `b = [1, 2)`. Points of `[0, 0.5)` and of `b`
/// other than `1.5` are fixed; `[0.5, 1)` collapses onto `1.5`, and `1.5`
/// maps to `0.25`. Every `ab` is therefore followed by `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseDemo {
    initial: ScalarInitial,
    alphabet: Alphabet,
}

impl PiecewiseDemo {
    pub const SEGMENT: f64 = 1.5;
    pub const RETURN_POINT: f64 = 0.25;

    pub fn new(initial: ScalarInitial) -> Result<Self> {
        initial.validate(0.0, 2.0, "piecewise demo")?;
        Ok(Self {
            initial,
            alphabet: Alphabet::new(["a", "b"])?,
        })
    }

    pub fn initial(&self) -> ScalarInitial {
        self.initial
    }

    pub fn map(x: f64) -> f64 {
        if (0.5..1.0).contains(&x) {
            Self::SEGMENT
        } else if x == Self::SEGMENT {
            Self::RETURN_POINT
        } else {
            x
        }
    }

    pub fn label(x: f64) -> Letter {
        if x < 1.0 {
            0
        } else {
            1
        }
    }
}

impl Default for PiecewiseDemo {
    fn default() -> Self {
        Self::new(ScalarInitial::Uniform {
            low: 0.0,
            high: 2.0,
        })
        .expect("valid defaults")
    }
}

impl DynamicalSystem for PiecewiseDemo {
    type State = f64;

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn dimension(&self) -> usize {
        1
    }

    fn sample_initial(&self, rng: &mut RandomStream) -> f64 {
        self.initial.sample(rng)
    }

    fn step(&self, x: &f64, _rng: &mut RandomStream) -> f64 {
        Self::map(*x)
    }

    fn output(&self, x: &f64) -> Letter {
        Self::label(*x)
    }

    fn coordinates(&self, x: &f64, out: &mut [f64]) {
        out[0] = *x;
    }
}

/// Finite-state Markov chain with labelled states.
#[derive(Clone, Debug, PartialEq)]
pub struct TableDriven {
    alphabet: Alphabet,
    state_labels: Vec<Letter>,
    rows: Vec<Vec<f64>>,
    initial: Vec<f64>,
}

impl TableDriven {
    /// `rows[i][j]` is the probability of moving from state `i` to `j`.
    pub fn new(
        alphabet: Alphabet,
        state_labels: Vec<Letter>,
        rows: Vec<Vec<f64>>,
        initial: Vec<f64>,
    ) -> Result<Self> {
        let n = state_labels.len();
        if n == 0 {
            return Err(Error::invalid(
                "table-driven system needs at least one state",
            ));
        }
        if let Some(&bad) = state_labels.iter().find(|&&l| !alphabet.contains_letter(l)) {
            return Err(Error::invalid(format!(
                "state label {bad} is outside the alphabet"
            )));
        }
        if rows.len() != n || initial.len() != n {
            return Err(Error::invalid(format!(
                "table-driven system has {n} states but {} rows and {} initial weights",
                rows.len(),
                initial.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            check_probability_vector(row, n, &format!("transition row {i}"))?;
        }
        check_probability_vector(&initial, n, "initial distribution")?;
        Ok(Self {
            alphabet,
            state_labels,
            rows,
            initial,
        })
    }

    pub fn state_count(&self) -> usize {
        self.state_labels.len()
    }

    pub fn state_labels(&self) -> &[Letter] {
        &self.state_labels
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }
}

fn check_probability_vector(v: &[f64], n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::invalid(format!(
            "{what} has {} entries, expected {n}",
            v.len()
        )));
    }
    if v.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::invalid(format!(
            "{what} has a negative or non-finite entry"
        )));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::invalid(format!(
            "{what} sums to {total}, expected 1"
        )));
    }
    Ok(())
}

impl DynamicalSystem for TableDriven {
    type State = usize;

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn dimension(&self) -> usize {
        1
    }

    fn sample_initial(&self, rng: &mut RandomStream) -> usize {
        rng.categorical(self.initial.iter().copied())
    }

    fn step(&self, state: &usize, rng: &mut RandomStream) -> usize {
        rng.categorical(self.rows[*state].iter().copied())
    }

    fn output(&self, state: &usize) -> Letter {
        self.state_labels[*state]
    }

    fn coordinates(&self, state: &usize, out: &mut [f64]) {
        out[0] = *state as f64;
    }
}

/// Callback used to run generic code against whichever system a
/// [`SystemSpec`] holds.
pub trait SystemVisitor {
    type Output;

    fn visit<S: DynamicalSystem + Sync>(self, system: &S) -> Self::Output;
}

/// Any of the supported systems.
#[derive(Clone, Debug, PartialEq)]
pub enum SystemSpec {
    Sturmian(Sturmian),
    SwitchedLinear(SwitchedLinear),
    PiecewiseDemo(PiecewiseDemo),
    TableDriven(TableDriven),
}

impl SystemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SystemSpec::Sturmian(_) => "sturmian",
            SystemSpec::SwitchedLinear(_) => "switched-linear",
            SystemSpec::PiecewiseDemo(_) => "piecewise-demo",
            SystemSpec::TableDriven(_) => "table-driven",
        }
    }

    pub fn accept<V: SystemVisitor>(&self, visitor: V) -> V::Output {
        match self {
            SystemSpec::Sturmian(s) => visitor.visit(s),
            SystemSpec::SwitchedLinear(s) => visitor.visit(s),
            SystemSpec::PiecewiseDemo(s) => visitor.visit(s),
            SystemSpec::TableDriven(s) => visitor.visit(s),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            SystemSpec::Sturmian(s) => s.alphabet(),
            SystemSpec::SwitchedLinear(s) => s.alphabet(),
            SystemSpec::PiecewiseDemo(s) => s.alphabet(),
            SystemSpec::TableDriven(s) => s.alphabet(),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            SystemSpec::SwitchedLinear(_) => 2,
            _ => 1,
        }
    }

    pub fn description(&self) -> String {
        match self {
            SystemSpec::Sturmian(s) => format!("sturmian(theta={})", s.theta),
            SystemSpec::SwitchedLinear(s) => format!("switched-linear(p={})", s.p),
            SystemSpec::PiecewiseDemo(_) => "piecewise-demo".into(),
            SystemSpec::TableDriven(s) => format!("table-driven(states={})", s.state_count()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamDomain;
    use alloc::vec;

    fn rng() -> RandomStream {
        RandomStream::new(42, StreamDomain::Trajectory, 0)
    }

    #[test]
    fn sturmian_step_examples() {
        let s = Sturmian::new(
            TAU * 0.3,
            ScalarInitial::Uniform {
                low: 0.0,
                high: TAU,
            },
        )
        .unwrap();
        assert_eq!(s.step(&0.0, &mut rng()), TAU * 0.3);
        let wrapped = s.step(&(TAU * 0.9), &mut rng());
        assert!((wrapped - TAU * 0.2).abs() < 1e-12, "{wrapped}");
        assert_eq!(s.output(&(0.1 * TAU)), 0);
        assert_eq!(s.output(&(0.5 * TAU)), 1);
    }

    #[test]
    fn sturmian_stays_on_circle_and_is_pure() {
        let s = Sturmian::default();
        let mut r = rng();
        for _ in 0..10_000 {
            let x = s.sample_initial(&mut r);
            assert!((0.0..TAU).contains(&x));
            let y = s.step(&x, &mut r);
            assert!((0.0..TAU).contains(&y));
            assert_eq!(y.to_bits(), s.step(&x, &mut rng()).to_bits());
        }
        assert!((0.0..TAU).contains(&s.rotate(TAU.next_down())));
    }

    #[test]
    fn sturmian_rejects_bad_theta() {
        assert!(Sturmian::new(0.0, ScalarInitial::Point(0.0)).is_err());
        assert!(Sturmian::new(TAU, ScalarInitial::Point(0.0)).is_err());
        assert!(Sturmian::new(1.0, ScalarInitial::Point(TAU)).is_err());
    }

    #[test]
    fn piecewise_map_examples() {
        let p = PiecewiseDemo::default();
        assert_eq!(p.step(&1.5, &mut rng()), 0.25);
        assert_eq!(p.output(&1.5), 1);
        assert_eq!(p.step(&0.7, &mut rng()), 1.5);
        assert_eq!(p.step(&0.2, &mut rng()), 0.2);
        assert_eq!(p.step(&1.2, &mut rng()), 1.2);
        let mut r = rng();
        for _ in 0..1000 {
            assert!((0.0..2.0).contains(&p.sample_initial(&mut r)));
        }
    }

    #[test]
    fn switched_initial_stays_in_box() {
        let s = SwitchedLinear::default();
        let mut r = rng();
        for _ in 0..10_000 {
            let x = s.sample_initial(&mut r);
            assert!(x.iter().all(|v| (-2.0..=2.0).contains(v)));
        }
    }

    #[test]
    fn switched_mode_frequency_matches_p() {
        let s = SwitchedLinear::default();
        let x = [1.0, 0.0];
        let a1x = SwitchedLinear::apply(&SwitchedLinear::DEFAULT_A1, &x);
        let a2x = SwitchedLinear::apply(&SwitchedLinear::DEFAULT_A2, &x);
        let mut r = rng();
        let n = 100_000;
        let mut mode1 = 0;
        for _ in 0..n {
            let y = s.step(&x, &mut r);
            if y == a1x {
                mode1 += 1;
            } else {
                assert_eq!(y, a2x);
            }
        }
        assert!((mode1 as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn switched_labels_cover_nine_cells() {
        assert_eq!(SwitchedLinear::label(&[0.1, -0.2]), 0);
        assert_eq!(SwitchedLinear::label(&[1.5, 0.0]), 1);
        assert_eq!(SwitchedLinear::label(&[-1.5, 0.1]), 2);
        assert_eq!(SwitchedLinear::label(&[-1.5, -0.1]), 3);
        assert_eq!(SwitchedLinear::label(&[0.0, -1.0]), 4);
        assert_eq!(SwitchedLinear::label(&[2.0, 0.0]), 5);
        assert_eq!(SwitchedLinear::label(&[-3.0, 3.0]), 6);
        assert_eq!(SwitchedLinear::label(&[-3.0, -3.0]), 7);
        assert_eq!(SwitchedLinear::label(&[3.0, -3.0]), 8);
    }

    #[test]
    fn table_driven_dirac_initial() {
        let t = TableDriven::new(
            Alphabet::new(["a", "b", "c", "d"]).unwrap(),
            vec![0, 1, 2, 3],
            vec![
                vec![0.0, 1.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0],
            ],
            vec![0.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        let mut r = rng();
        for _ in 0..100 {
            assert_eq!(t.sample_initial(&mut r), 3);
        }
    }

    #[test]
    fn table_driven_rejects_bad_rows() {
        let ab = Alphabet::new(["a", "b"]).unwrap();
        assert!(TableDriven::new(
            ab.clone(),
            vec![0, 1],
            vec![vec![0.5, 0.4], vec![0.0, 1.0]],
            vec![1.0, 0.0]
        )
        .is_err());
        assert!(TableDriven::new(
            ab,
            vec![0, 2],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![1.0, 0.0]
        )
        .is_err());
    }
}
