//! Homology and cohomology of finite groups with F_p coefficients.
//!
//! A free F_p[G]-resolution of F_p is built degree by degree: each kernel is
//! covered greedily by G-orbits of kernel vectors, and the chosen vectors
//! become the next boundary. Chain maps (induced maps, transfers, cocycle
//! lifts for products) are obtained by solving `∂q = f(∂b)` one basis
//! element at a time.

use std::sync::Arc;

use crate::falg::{
    BasisEntry, KronEntry, Mode, ModuleFile, ProductEntry, TablePresentation, WindowSpec,
};
use crate::fingroup::{FiniteGroup, GroupHom};
use crate::linalg::{Echelon, Matrix, Solver};
use crate::{Error, Fp, Result};

/// Size limits for resolutions.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_order: usize,
    pub max_degree: usize,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits {
            max_order: 24,
            max_degree: 12,
        }
    }
}

/// Free resolution `F_n = F_p[G]^{r_n}`. Vectors in `F_n` are dense with
/// coordinate `j * |G| + g` for generator `j` and group element `g`.
#[derive(Debug)]
pub struct Resolution {
    group: Arc<FiniteGroup>,
    field: Fp,
    ranks: Vec<usize>,
    /// `boundary[n][j]` is the boundary of generator `j` of `F_n`; empty at n = 0.
    boundary: Vec<Vec<Vec<u32>>>,
    /// Solvers for the F_p-matrix of `∂_n`, n ≥ 1.
    solvers: Vec<Option<Solver>>,
}

impl Resolution {
    /// Resolution through degree `top`.
    pub fn new(group: Arc<FiniteGroup>, field: Fp, top: usize) -> Resolution {
        let n = group.order();
        let mut res = Resolution {
            group,
            field,
            ranks: vec![1],
            boundary: vec![Vec::new()],
            solvers: vec![None],
        };
        let mut kernel = Matrix::from_rows(&[vec![1; n]], n).kernel(field);
        for deg in 1..=top {
            let prev = res.ranks[deg - 1];
            // Candidates independent modulo I·K come first; for p-groups they
            // already generate K (Nakayama), otherwise the greedy pass tops up.
            let mut radical = Echelon::new(field, prev * n);
            for v in &kernel {
                for &s in res.group.generators() {
                    let sv = res.act(s, v, prev);
                    let d: Vec<u32> = sv.iter().zip(v).map(|(&a, &b)| field.sub(a, b)).collect();
                    radical.insert(&d);
                }
            }
            let mut order: Vec<&Vec<u32>> = Vec::new();
            for v in &kernel {
                if radical.insert(v) {
                    order.push(v);
                }
            }
            order.extend(kernel.iter());
            let mut span = Echelon::new(field, prev * n);
            let mut gens = Vec::new();
            for v in order {
                if span.len() == kernel.len() {
                    break;
                }
                if span.contains(v) {
                    continue;
                }
                for g in 0..n {
                    span.insert(&res.act(g, v, prev));
                }
                gens.push(v.clone());
            }
            res.ranks.push(gens.len());
            res.boundary.push(gens);
            let m = res.matrix(deg);
            kernel = m.kernel(field);
            res.solvers.push(Some(Solver::new(field, &m)));
        }
        res
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn field(&self) -> Fp {
        self.field
    }

    pub fn top(&self) -> usize {
        self.ranks.len() - 1
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Left action of `g` on a vector of `F_n` with `rank` generators.
    fn act(&self, g: usize, v: &[u32], rank: usize) -> Vec<u32> {
        let n = self.group.order();
        let mut w = vec![0; rank * n];
        for j in 0..rank {
            for h in 0..n {
                let c = v[j * n + h];
                if c != 0 {
                    w[j * n + self.group.mul(g, h)] = c;
                }
            }
        }
        w
    }

    /// `∂_deg` applied to an arbitrary vector of `F_deg`.
    pub fn apply_boundary(&self, deg: usize, v: &[u32]) -> Vec<u32> {
        let f = self.field;
        let n = self.group.order();
        let prev = self.ranks[deg - 1];
        let mut out = vec![0; prev * n];
        for j in 0..self.ranks[deg] {
            for g in 0..n {
                let c = v[j * n + g];
                if c == 0 {
                    continue;
                }
                let img = self.act(g, &self.boundary[deg][j], prev);
                for (o, x) in out.iter_mut().zip(img) {
                    *o = f.add(*o, f.mul(c, x));
                }
            }
        }
        out
    }

    fn matrix(&self, deg: usize) -> Matrix {
        let n = self.group.order();
        let prev = self.ranks[deg - 1];
        let cols: Vec<Vec<u32>> = (0..self.ranks[deg])
            .flat_map(|j| (0..n).map(move |g| (j, g)))
            .map(|(j, g)| self.act(g, &self.boundary[deg][j], prev))
            .collect();
        Matrix::from_columns(&cols, prev * n)
    }

    /// Exact check that `∂_{n-1} ∘ ∂_n = 0` and `ε ∘ ∂_1 = 0`.
    pub fn boundary_squares_vanish(&self) -> bool {
        let f = self.field;
        for deg in 1..=self.top() {
            for v in &self.boundary[deg] {
                let ok = if deg == 1 {
                    v.iter().fold(0, |a, &x| f.add(a, x)) == 0
                } else {
                    self.apply_boundary(deg - 1, v).iter().all(|&x| x == 0)
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    /// Differential of `F ⊗_G F_p`, an `r_{n-1} × r_n` matrix.
    fn coinvariant_differential(&self, deg: usize) -> Matrix {
        let f = self.field;
        let n = self.group.order();
        let mut m = Matrix::zeros(self.ranks[deg - 1], self.ranks[deg]);
        for (j, b) in self.boundary[deg].iter().enumerate() {
            for (k, &c) in b.iter().enumerate() {
                if c != 0 {
                    let i = k / n;
                    m.set(i, j, f.add(m.get(i, j), c));
                }
            }
        }
        m
    }

    fn solve(&self, deg: usize, y: &[u32]) -> Result<Vec<u32>> {
        let s = self.solvers[deg]
            .as_ref()
            .ok_or_else(|| Error::Internal("no solver in degree 0".into()))?;
        let q = s.solve(y).ok_or_else(|| {
            Error::Internal(format!("resolution is not exact in degree {}", deg - 1))
        })?;
        if self.apply_boundary(deg, &q) != y {
            return Err(Error::Internal(
                "chain map lift failed back-substitution".into(),
            ));
        }
        Ok(q)
    }
}

/// A resolution regarded as a free module over a group `A` acting through an
/// injective homomorphism into the resolved group. Basis `(j, r)`: generator
/// `j` translated by the right coset representative `r`.
struct FreeView<'a> {
    res: &'a Resolution,
    reps: Vec<usize>,
    /// For each group element `g`: `(a, r)` with `g = α(a) · reps[r]`.
    decomp: Vec<(usize, usize)>,
}

impl<'a> FreeView<'a> {
    fn whole(res: &'a Resolution) -> FreeView<'a> {
        let e = res.group.identity();
        FreeView {
            res,
            reps: vec![e],
            decomp: (0..res.group.order()).map(|g| (g, 0)).collect(),
        }
    }

    fn restricted(res: &'a Resolution, alpha: &GroupHom) -> Result<FreeView<'a>> {
        if !alpha.is_injective() {
            return Err(Error::Precondition(
                "transfer needs an injective inclusion".into(),
            ));
        }
        let g = &res.group;
        let mut decomp = vec![(usize::MAX, usize::MAX); g.order()];
        let mut reps = Vec::new();
        for x in 0..g.order() {
            if decomp[x].0 != usize::MAX {
                continue;
            }
            let r = reps.len();
            reps.push(x);
            for a in 0..alpha.source.order() {
                decomp[g.mul(alpha.apply(a), x)] = (a, r);
            }
        }
        Ok(FreeView { res, reps, decomp })
    }

    fn basis_len(&self, deg: usize) -> usize {
        self.res.ranks[deg] * self.reps.len()
    }

    /// Boundary of basis element `b` in resolution coordinates.
    fn boundary_of(&self, deg: usize, b: usize) -> Vec<u32> {
        let (j, r) = (b / self.reps.len(), b % self.reps.len());
        self.res.act(
            self.reps[r],
            &self.res.boundary[deg][j],
            self.res.ranks[deg - 1],
        )
    }
}

/// Chain map from a free view into another resolution, lowering degree by
/// `shift`: `images[n][b]` is the image of basis element `b` of degree
/// `n + shift`, as a vector of the target's `F_n`.
struct Lift {
    images: Vec<Vec<Vec<u32>>>,
}

fn lift(
    view: &FreeView,
    target: &Resolution,
    phi: &[usize],
    shift: usize,
    top: usize,
    init: impl Fn(usize) -> Vec<u32>,
) -> Result<Lift> {
    let f = target.field;
    let ns = view.res.group.order();
    let nt = target.group.order();
    let mut images: Vec<Vec<Vec<u32>>> = vec![(0..view.basis_len(shift)).map(&init).collect()];
    for n in 1..=top {
        let mut layer = Vec::with_capacity(view.basis_len(n + shift));
        for b in 0..view.basis_len(n + shift) {
            let db = view.boundary_of(n + shift, b);
            let mut y = vec![0; target.ranks[n - 1] * nt];
            for (k, &c) in db.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let (a, r) = view.decomp[k % ns];
                let src = (k / ns) * view.reps.len() + r;
                let img = target.act(phi[a], &images[n - 1][src], target.ranks[n - 1]);
                for (o, x) in y.iter_mut().zip(img) {
                    *o = f.add(*o, f.mul(c, x));
                }
            }
            layer.push(target.solve(n, &y)?);
        }
        images.push(layer);
    }
    Ok(Lift { images })
}

impl Lift {
    /// The induced map on coinvariants in target degree `n`.
    fn coinvariant(&self, target: &Resolution, n: usize) -> Matrix {
        let f = target.field;
        let nt = target.group.order();
        let cols: Vec<Vec<u32>> = self.images[n]
            .iter()
            .map(|v| {
                let mut c = vec![0; target.ranks[n]];
                for (k, &x) in v.iter().enumerate() {
                    c[k / nt] = f.add(c[k / nt], x);
                }
                c
            })
            .collect();
        Matrix::from_columns(&cols, target.ranks[n])
    }
}

/// Homology of a chain complex of F_p-spaces with chosen representatives.
#[derive(Debug)]
struct ChainHomology {
    field: Fp,
    /// Cycle representatives of a homology basis per degree.
    reps: Vec<Vec<Vec<u32>>>,
    /// Solvers for `[reps | boundaries] c = z`.
    coords: Vec<Solver>,
}

impl ChainHomology {
    /// `d[n]` is the differential out of degree `n` for `1 ≤ n ≤ top + 1`.
    fn new(f: Fp, dims: &[usize], d: &[Matrix], top: usize) -> ChainHomology {
        let mut reps = Vec::new();
        let mut coords = Vec::new();
        for n in 0..=top {
            let cycles = if n == 0 {
                (0..dims[0]).map(|i| unit(dims[0], i)).collect()
            } else {
                d[n].kernel(f)
            };
            let mut span = Echelon::new(f, dims[n]);
            let mut bcols = Vec::new();
            for j in 0..d[n + 1].cols {
                let c = d[n + 1].column(j);
                if span.insert(&c) {
                    bcols.push(c);
                }
            }
            let mut hs = Vec::new();
            for z in cycles {
                if span.insert(&z) {
                    hs.push(z);
                }
            }
            let all: Vec<Vec<u32>> = hs.iter().chain(bcols.iter()).cloned().collect();
            coords.push(Solver::new(f, &Matrix::from_columns(&all, dims[n])));
            reps.push(hs);
        }
        ChainHomology {
            field: f,
            reps,
            coords,
        }
    }

    fn dim(&self, n: usize) -> usize {
        self.reps[n].len()
    }

    /// Coordinates of a cycle in the homology basis.
    fn coordinates(&self, n: usize, z: &[u32]) -> Result<Vec<u32>> {
        let c = self.coords[n]
            .solve(z)
            .ok_or_else(|| Error::Internal(format!("vector in degree {n} is not a cycle")))?;
        Ok(c[..self.dim(n)].to_vec())
    }

    /// Matrix of a chain map on homology, columns indexed by source basis.
    fn induced(&self, source: &ChainHomology, n: usize, chain: &Matrix) -> Result<Matrix> {
        let cols = source.reps[n]
            .iter()
            .map(|h| self.coordinates(n, &chain.mul_vec(self.field, h)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_columns(&cols, self.dim(n)))
    }
}

fn unit(len: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0; len];
    v[i] = 1;
    v
}

fn dot(f: Fp, a: &[u32], b: &[u32]) -> u32 {
    a.iter()
        .zip(b)
        .fold(0, |acc, (&x, &y)| f.add(acc, f.mul(x, y)))
}

/// `H_*(BG; F_p)` and `H^*(BG; F_p)` through a degree window, with homology
/// bases, dual cohomology bases and the cup product.
#[derive(Debug)]
pub struct GroupHomology {
    resolution: Resolution,
    max_degree: usize,
    homology: ChainHomology,
    /// `cocycles[n][i]` represents the cohomology class dual to homology
    /// basis element `i` in degree `n`.
    cocycles: Vec<Vec<Vec<u32>>>,
}

impl GroupHomology {
    pub fn compute(group: Arc<FiniteGroup>, p: u32, max_degree: usize) -> Result<GroupHomology> {
        GroupHomology::compute_with(group, p, max_degree, Limits::default())
    }

    pub fn compute_with(
        group: Arc<FiniteGroup>,
        p: u32,
        max_degree: usize,
        limits: Limits,
    ) -> Result<GroupHomology> {
        let field = Fp::new(p).ok_or_else(|| Error::Precondition(format!("{p} is not prime")))?;
        if group.order() > limits.max_order {
            return Err(Error::Size(format!(
                "group of order {} exceeds the limit {}",
                group.order(),
                limits.max_order
            )));
        }
        if max_degree > limits.max_degree {
            return Err(Error::Size(format!(
                "degree {max_degree} exceeds the limit {}",
                limits.max_degree
            )));
        }
        let resolution = Resolution::new(group, field, max_degree + 1);
        let mut d = vec![Matrix::zeros(0, 0)];
        for n in 1..=max_degree + 1 {
            d.push(resolution.coinvariant_differential(n));
        }
        let homology = ChainHomology::new(field, resolution.ranks(), &d, max_degree);
        let mut cocycles = Vec::new();
        for n in 0..=max_degree {
            // Cocycles are the left kernel of d_{n+1}; pick the dual basis.
            let z = d[n + 1].transpose().kernel(field);
            let pair: Vec<Vec<u32>> = homology.reps[n]
                .iter()
                .map(|h| z.iter().map(|c| dot(field, c, h)).collect())
                .collect();
            let s = Solver::new(field, &Matrix::from_rows(&pair, z.len()));
            let mut layer = Vec::new();
            for i in 0..homology.dim(n) {
                let c = s.solve(&unit(homology.dim(n), i)).ok_or_else(|| {
                    Error::Internal(format!("Kronecker pairing degenerate in degree {n}"))
                })?;
                let mut v = vec![0; resolution.ranks()[n]];
                for (k, &x) in c.iter().enumerate() {
                    for (vi, zi) in v.iter_mut().zip(&z[k]) {
                        *vi = field.add(*vi, field.mul(x, *zi));
                    }
                }
                layer.push(v);
            }
            cocycles.push(layer);
        }
        Ok(GroupHomology {
            resolution,
            max_degree,
            homology,
            cocycles,
        })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.resolution.group()
    }

    pub fn field(&self) -> Fp {
        self.resolution.field
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn resolution(&self) -> &Resolution {
        &self.resolution
    }

    pub fn dim(&self, n: usize) -> usize {
        self.homology.dim(n)
    }

    pub fn dims(&self) -> Vec<usize> {
        (0..=self.max_degree).map(|n| self.dim(n)).collect()
    }

    /// Coordinates, in the dual cohomology basis of degree `a + b`, of the
    /// product of basis classes `(a, i)` and `(b, j)`. The product is the
    /// composite of the cocycle for `(a, i)` with a chain-map lift of the
    /// cocycle for `(b, j)`.
    pub fn cup(&self, a: usize, i: usize, b: usize, j: usize) -> Result<Vec<u32>> {
        let lifted = self.lift_cocycle(b, j, a)?;
        Ok(self.cup_with_lift(&lifted, a, i, b))
    }

    fn lift_cocycle(&self, b: usize, j: usize, depth: usize) -> Result<Lift> {
        if b + depth > self.max_degree {
            return Err(Error::Window(format!(
                "product lands in degree {} beyond {}",
                b + depth,
                self.max_degree
            )));
        }
        let res = &self.resolution;
        let n = res.group.order();
        let e = res.group.identity();
        let beta = &self.cocycles[b][j];
        let view = FreeView::whole(res);
        let ids: Vec<usize> = (0..n).collect();
        lift(&view, res, &ids, b, depth, |k| {
            let mut v = vec![0; n];
            v[e] = beta[k];
            v
        })
    }

    fn cup_with_lift(&self, lifted: &Lift, a: usize, i: usize, b: usize) -> Vec<u32> {
        let f = self.field();
        let tau = lifted.coinvariant(&self.resolution, a);
        let alpha = &self.cocycles[a][i];
        // (α ∘ τ) as a cochain on generators of degree a + b.
        let prod: Vec<u32> = (0..tau.cols)
            .map(|k| dot(f, alpha, &tau.column(k)))
            .collect();
        self.homology.reps[a + b]
            .iter()
            .map(|h| dot(f, &prod, h))
            .collect()
    }

    /// Every product of basis classes whose degree fits the window, keyed by
    /// `((a, i), (b, j))`.
    pub fn cup_table(&self) -> Result<Vec<(((usize, usize), (usize, usize)), Vec<u32>)>> {
        let mut out = Vec::new();
        for b in 0..=self.max_degree {
            for j in 0..self.dim(b) {
                let lifted = self.lift_cocycle(b, j, self.max_degree - b)?;
                for a in 0..=self.max_degree - b {
                    for i in 0..self.dim(a) {
                        out.push((((a, i), (b, j)), self.cup_with_lift(&lifted, a, i, b)));
                    }
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Emits the window as a table presentation: homology `h{n}_{i}`, dual
    /// cohomology `c{n}_{i}`, with cap products determined by adjunction.
    pub fn to_module_file(&self, name: &str) -> Result<ModuleFile> {
        let hl = |n: usize, i: usize| format!("h{n}_{i}");
        let cl = |n: usize, i: usize| format!("c{n}_{i}");
        let mut homology = Vec::new();
        let mut cohomology = Vec::new();
        let mut kron = Vec::new();
        for n in 0..=self.max_degree {
            for i in 0..self.dim(n) {
                homology.push(BasisEntry {
                    label: hl(n, i),
                    degree: n.to_string(),
                });
                cohomology.push(BasisEntry {
                    label: cl(n, i),
                    degree: n.to_string(),
                });
                kron.push(KronEntry {
                    left: cl(n, i),
                    right: hl(n, i),
                    value: 1,
                });
            }
        }
        let table = self.cup_table()?;
        let mut cup = Vec::new();
        let mut cap = Vec::new();
        for (((a, i), (b, j)), coords) in &table {
            let result: Vec<(String, i64)> = coords
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(k, &c)| (cl(a + b, k), c as i64))
                .collect();
            cup.push(ProductEntry {
                left: cl(*a, *i),
                right: cl(*b, *j),
                result,
            });
        }
        // x ⌢ ξ = Σ_η <η ⌣ ξ, x> x_η for η dual to the homology basis.
        let lookup: std::collections::HashMap<((usize, usize), (usize, usize)), &Vec<u32>> =
            table.iter().map(|(k, v)| (*k, v)).collect();
        for n in 0..=self.max_degree {
            for k in 0..self.dim(n) {
                for b in 0..=self.max_degree {
                    for j in 0..self.dim(b) {
                        let mut result = Vec::new();
                        if b <= n {
                            for i in 0..self.dim(n - b) {
                                let c = lookup[&((n - b, i), (b, j))][k];
                                if c != 0 {
                                    result.push((hl(n - b, i), c as i64));
                                }
                            }
                        }
                        cap.push(ProductEntry {
                            left: hl(n, k),
                            right: cl(b, j),
                            result,
                        });
                    }
                }
            }
        }
        Ok(ModuleFile {
            name: name.to_string(),
            prime: self.field().p(),
            window: WindowSpec::UpTo {
                label: crate::rodegree::TRIVIAL.into(),
                max: self.max_degree as i64,
            },
            mode: Mode::Strict,
            homology,
            cohomology,
            unit: Some(cl(0, 0)),
            cup,
            cap,
            kron,
        })
    }

    pub fn to_presentation(&self, name: &str) -> Result<TablePresentation> {
        self.to_module_file(name)?.build()
    }
}

/// Matrices of `h_*: H_n(BH) -> H_n(BG)` for `n` up to the smaller window.
pub fn induced(
    h: &GroupHom,
    source: &GroupHomology,
    target: &GroupHomology,
) -> Result<Vec<Matrix>> {
    check_pair(source, target, h.source.order(), h.target.order())?;
    let top = source.max_degree.min(target.max_degree);
    let view = FreeView::whole(&source.resolution);
    let e = target.group().identity();
    let nt = target.group().order();
    let lifted = lift(&view, &target.resolution, h.images(), 0, top, |_| {
        unit(nt, e)
    })?;
    (0..=top)
        .map(|n| {
            target.homology.induced(
                &source.homology,
                n,
                &lifted.coinvariant(&target.resolution, n),
            )
        })
        .collect()
}

/// Matrices of the transfer `H_n(BG) -> H_n(BK)` for an inclusion `K -> G`.
pub fn transfer(inclusion: &GroupHom, g: &GroupHomology, k: &GroupHomology) -> Result<Vec<Matrix>> {
    check_pair(k, g, inclusion.source.order(), inclusion.target.order())?;
    let top = g.max_degree.min(k.max_degree);
    let view = FreeView::restricted(&g.resolution, inclusion)?;
    let e = k.group().identity();
    let nk = k.group().order();
    let ids: Vec<usize> = (0..nk).collect();
    let lifted = lift(&view, &k.resolution, &ids, 0, top, |_| unit(nk, e))?;
    let f = g.field();
    let r = view.reps.len();
    let mut out = Vec::new();
    for n in 0..=top {
        // Coset sum e_j -> Σ_r (j, r), then the lift to K's resolution.
        let l = lifted.coinvariant(&k.resolution, n);
        let rank = g.resolution.ranks[n];
        let mut sum = Matrix::zeros(rank * r, rank);
        for j in 0..rank {
            for c in 0..r {
                sum.set(j * r + c, j, 1);
            }
        }
        let chain = l.mul(f, &sum);
        out.push(k.homology.induced(&g.homology, n, &chain)?);
    }
    Ok(out)
}

fn check_pair(s: &GroupHomology, t: &GroupHomology, so: usize, to: usize) -> Result<()> {
    if s.field() != t.field() {
        return Err(Error::Precondition(
            "homology computed at different primes".into(),
        ));
    }
    if s.group().order() != so || t.group().order() != to {
        return Err(Error::Precondition(
            "homology windows do not match the homomorphism".into(),
        ));
    }
    Ok(())
}

/// Transpose of a homology map: the induced map on cohomology in dual bases.
pub fn cohomology_map(homology_map: &Matrix) -> Matrix {
    homology_map.transpose()
}
