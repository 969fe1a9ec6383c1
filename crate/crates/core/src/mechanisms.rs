//! Finite menus: buyer choice, exact revenue by polygonal decomposition, and
//! parametric searches for good deterministic and randomized menus.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::closed_forms;
use crate::fields::{clip_polygon, polygon_area, HalfPlane, Point, Square};

/// Utilities within this distance are treated as ties by `buyer_choice`.
const TIE_TOL: f64 = 1e-12;

/// An (allocation, payment) pair offered to the buyer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MenuOption {
    pub a1: f64,
    pub a2: f64,
    pub t: f64,
}

impl MenuOption {
    pub const OUTSIDE: MenuOption = MenuOption {
        a1: 0.0,
        a2: 0.0,
        t: 0.0,
    };

    pub const fn new(a1: f64, a2: f64, t: f64) -> MenuOption {
        MenuOption { a1, a2, t }
    }

    pub fn utility(&self, x: Point) -> f64 {
        self.a1 * x.x1 + self.a2 * x.x2 - self.t
    }

    /// True if the buyer at a tie should prefer `self` over `other`.
    fn wins_tie(&self, other: &MenuOption) -> bool {
        if self.t != other.t {
            return self.t > other.t;
        }
        (self.a1, self.a2) > (other.a1, other.a2)
    }
}

/// A menu; the outside option `(0, 0, 0)` is always implicitly available.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Menu {
    options: Vec<MenuOption>,
}

impl Menu {
    /// Drops exact duplicates and copies of the outside option.
    pub fn new(options: Vec<MenuOption>) -> Menu {
        let mut kept: Vec<MenuOption> = Vec::with_capacity(options.len());
        for o in options {
            if o != MenuOption::OUTSIDE && !kept.contains(&o) {
                kept.push(o);
            }
        }
        Menu { options: kept }
    }

    /// Nontrivial options.
    pub fn options(&self) -> &[MenuOption] {
        &self.options
    }

    /// Options including the outside option (first).
    pub fn with_outside(&self) -> impl Iterator<Item = &MenuOption> {
        std::iter::once(&MenuOption::OUTSIDE).chain(self.options.iter())
    }

    pub fn len(&self) -> usize {
        self.options.len()
    }

    pub fn is_empty(&self) -> bool {
        self.options.is_empty()
    }
}

/// Utility-maximising option. Ties go to the higher payment, then to the
/// lexicographically larger allocation.
pub fn buyer_choice(menu: &Menu, x: Point) -> MenuOption {
    let mut best = MenuOption::OUTSIDE;
    let mut best_u = 0.0;
    for o in menu.options() {
        let u = o.utility(x);
        if u > best_u + TIE_TOL || ((u - best_u).abs() <= TIE_TOL && o.wins_tie(&best)) {
            best = *o;
            best_u = u;
        }
    }
    best
}

/// Choice cell of each option (outside option first): the polygon of
/// valuations for which it maximises utility.
pub fn menu_cells(menu: &Menu, c: f64) -> Vec<(MenuOption, Vec<Point>)> {
    let square = Square::new(c).polygon();
    let all: Vec<MenuOption> = menu.with_outside().copied().collect();
    all.iter()
        .map(|o| {
            // o is chosen where every other option gives at most as much.
            let hs: Vec<HalfPlane> = all
                .iter()
                .filter(|p| *p != o)
                .map(|p| HalfPlane::le(p.a1 - o.a1, p.a2 - o.a2, p.t - o.t))
                .collect();
            (*o, clip_polygon(&square, &hs))
        })
        .collect()
}

/// Expected payment under the uniform distribution on `[c, c+1]^2`.
pub fn menu_revenue(menu: &Menu, c: f64) -> f64 {
    menu_cells(menu, c)
        .iter()
        .map(|(o, cell)| o.t * polygon_area(cell))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BundleOffer {
    pub price: f64,
    pub revenue: f64,
}

/// Optimal take-it-or-leave-it price for the grand bundle.
pub fn best_full_bundle(c: f64) -> crate::Result<BundleOffer> {
    let price = closed_forms::params_b(c)?.p;
    Ok(BundleOffer {
        price,
        revenue: closed_forms::brev(c)?,
    })
}

/// Golden-section maximisation of the bundle-only menu revenue over
/// `[2c, 2c + 2]`; independent of the closed form.
pub fn golden_section_bundle(c: f64) -> BundleOffer {
    let f = |s: f64| menu_revenue(&Menu::new(vec![MenuOption::new(1.0, 1.0, s)]), c);
    let (price, revenue) = golden_section(f, 2.0 * c, 2.0 * c + 2.0, 1e-10);
    BundleOffer { price, revenue }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Symmetric deterministic menu: each item at `item_price`, the bundle at
/// `bundle_price`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterministicMenu {
    pub item_price: f64,
    pub bundle_price: f64,
    pub revenue: f64,
}

impl DeterministicMenu {
    pub fn menu(&self) -> Menu {
        deterministic_menu(self.item_price, self.bundle_price)
    }
}

fn deterministic_menu(s: f64, p: f64) -> Menu {
    Menu::new(vec![
        MenuOption::new(1.0, 0.0, s),
        MenuOption::new(0.0, 1.0, s),
        MenuOption::new(1.0, 1.0, p),
    ])
}

/// Grid spacing of the coarse deterministic scan.
const DET_GRID: f64 = 1e-2;
/// Coarse-grid winners refined locally.
const DET_REFINE: usize = 6;

/// Best symmetric deterministic menu: a coarse scan over item prices in
/// `[c, c+1]` and bundle prices in `[2c, 2c+2]`, then compass refinement of
/// the leading candidates to a step of `1e-9`.
pub fn best_deterministic(c: f64) -> DeterministicMenu {
    let f = |x: &[f64]| menu_revenue(&deterministic_menu(x[0], x[1]), c);
    let ns = (1.0 / DET_GRID).round() as usize;
    let np = (2.0 / DET_GRID).round() as usize;
    let mut scan: Vec<(f64, [f64; 2])> = (0..=ns)
        .into_par_iter()
        .flat_map_iter(|i| {
            let s = c + i as f64 * DET_GRID;
            (0..=np).map(move |j| {
                let p = 2.0 * c + j as f64 * DET_GRID;
                (f(&[s, p]), [s, p])
            })
        })
        .collect();
    scan.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(a.1[0].total_cmp(&b.1[0]))
            .then(a.1[1].total_cmp(&b.1[1]))
    });
    let lo = [c, 2.0 * c];
    let hi = [c + 1.0, 2.0 * c + 2.0];
    let best = scan
        .iter()
        .take(DET_REFINE)
        .map(|(_, x)| compass_search(&f, x.to_vec(), &lo, &hi, DET_GRID, 1e-9))
        .fold(None::<(f64, Vec<f64>)>, |acc, cand| match acc {
            Some(a) if a.0 >= cand.0 => Some(a),
            _ => Some(cand),
        })
        .expect("nonempty scan");
    DeterministicMenu {
        item_price: best.1[0],
        bundle_price: best.1[1],
        revenue: best.0,
    }
}

/// Maximises `f` by coordinate (compass) moves, halving the step whenever no
/// move improves, until the step drops below `min_step`.
fn compass_search(
    f: &impl Fn(&[f64]) -> f64,
    mut x: Vec<f64>,
    lo: &[f64],
    hi: &[f64],
    mut step: f64,
    min_step: f64,
) -> (f64, Vec<f64>) {
    let mut fx = f(&x);
    while step >= min_step {
        let mut improved = false;
        for k in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[k] = (y[k] + dir * step).clamp(lo[k], hi[k]);
                if y[k] == x[k] {
                    continue;
                }
                let fy = f(&y);
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    (fx, x)
}

/// Number of random starts of the randomized-menu search.
pub const SYMMETRIC_STARTS: usize = 24;

/// Parametric symmetric menus with `k` nontrivial options:
/// `k = 3`: `{(1, λ, t), (λ, 1, t), (1, 1, P)}`;
/// `k = 4`: additionally `(μ, μ, s)`.
fn symmetric_menu(k: usize, x: &[f64]) -> Menu {
    let mut options = vec![
        MenuOption::new(1.0, x[0], x[1]),
        MenuOption::new(x[0], 1.0, x[1]),
        MenuOption::new(1.0, 1.0, x[2]),
    ];
    if k == 4 {
        options.push(MenuOption::new(x[3], x[3], x[4]));
    }
    Menu::new(options)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSearch {
    pub menu: Menu,
    pub revenue: f64,
    /// Family parameters `(λ, t, P[, μ, s])`.
    pub params: Vec<f64>,
}

/// Best menu found in the symmetric `k`-option family by multi-start
/// compass search. A lower bound on the optimal randomized revenue; the
/// deterministic optimum is always among the starts, so the result never
/// falls below it.
pub fn best_symmetric_menu(c: f64, k: usize, seed: u64) -> crate::Result<SymmetricSearch> {
    if k != 3 && k != 4 {
        return Err(crate::Error::InvalidArgument(format!(
            "symmetric family needs k in {{3, 4}}, got {k}"
        )));
    }
    let top = c + 1.0;
    let dim = if k == 3 { 3 } else { 5 };
    let lo = [0.0, c, 2.0 * c, 0.0, c];
    let hi = [1.0, top, 2.0 * top, 1.0, 2.0 * top];
    let det = best_deterministic(c);
    // The fourth option starts priced out of the market.
    let mut starts = vec![vec![0.0, det.item_price, det.bundle_price, 0.5, 2.0 * top]];
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..SYMMETRIC_STARTS {
        let mut x: Vec<f64> = (0..5).map(|i| rng.gen_range(lo[i]..=hi[i])).collect();
        x[1] = x[1].min(x[2]);
        starts.push(x);
    }
    let f = |x: &[f64]| menu_revenue(&symmetric_menu(k, x), c);
    let runs: Vec<(f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|mut x| {
            x.truncate(dim);
            compass_search(&f, x, &lo[..dim], &hi[..dim], 0.05, 1e-6)
        })
        .collect();
    let (revenue, params) = runs
        .into_iter()
        .fold(None::<(f64, Vec<f64>)>, |acc, cand| match acc {
            Some(a) if a.0 >= cand.0 => Some(a),
            _ => Some(cand),
        })
        .expect("at least one start");
    Ok(SymmetricSearch {
        menu: symmetric_menu(k, &params),
        revenue,
        params,
    })
}
