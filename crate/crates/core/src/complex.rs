//! Abstract simplicial complexes, vertex embeddings and the geometric
//! complexes they induce.
//!
//! Simplices are stored as strictly increasing vertex-id tuples. A complex is
//! always face-closed; [`AbstractComplex::new`] inserts every missing face of
//! the simplices it is given, so a mesh listing only its triangles is enough
//! input.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};

/// A non-empty set of vertex ids, kept sorted.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(Box<[usize]>);

impl Simplex {
    /// Builds a simplex from vertex ids in any order.
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptySimplex);
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::RepeatedVertex(vertices));
        }
        Ok(Simplex(vertices.into_boxed_slice()))
    }

    fn from_sorted(vertices: Vec<usize>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Simplex(vertices.into_boxed_slice())
    }

    /// Number of vertices minus one.
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    /// `(-1)^dim`, the simplex's contribution to the Euler characteristic.
    pub fn sign(&self) -> i64 {
        if self.dim().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Codimension-one faces, in lexicographic order. Empty for a vertex.
    pub fn boundary(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..n).rev().map(move |skip| {
            Simplex::from_sorted(
                self.0
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect(),
            )
        })
    }

    /// Every non-empty subset of the vertex set, including the simplex itself.
    fn all_faces(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = self.0.len();
        (1u64..(1u64 << n)).map(move |mask| {
            Simplex::from_sorted(
                (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| self.0[i])
                    .collect(),
            )
        })
    }

    /// True when `self` is a (not necessarily proper) face of `other`.
    pub fn is_face_of(&self, other: &Simplex) -> bool {
        // both sorted: merge-style subset test
        let mut it = other.0.iter();
        self.0.iter().all(|v| it.by_ref().any(|w| w == v))
    }
}

impl Deref for Simplex {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &self.0[..])
    }
}

/// A finite, face-closed collection of simplices.
///
/// Simplices are kept in canonical order: by dimension, then
/// lexicographically by vertex ids. Indices returned by
/// [`AbstractComplex::index_of`] refer to that order.
#[derive(Clone, Debug)]
pub struct AbstractComplex {
    simplices: Vec<Simplex>,
    index: HashMap<Simplex, usize>,
    vertices: Vec<usize>,
}

impl PartialEq for AbstractComplex {
    fn eq(&self, other: &Self) -> bool {
        self.simplices == other.simplices
    }
}

impl Eq for AbstractComplex {}

impl AbstractComplex {
    /// Face closure of the given simplices.
    pub fn new<I, S>(simplices: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<Vec<usize>>,
    {
        let mut all = BTreeSet::new();
        let mut any = false;
        for s in simplices {
            any = true;
            let s = Simplex::new(s.into())?;
            if all.contains(&s) {
                continue;
            }
            all.extend(s.all_faces());
        }
        if !any {
            return Err(Error::EmptyComplex);
        }
        Ok(Self::from_closed(all.into_iter().collect()))
    }

    /// The complex with no simplices. Only reachable internally and through
    /// superlevel sets; [`AbstractComplex::new`] rejects empty input.
    pub fn empty() -> Self {
        Self::from_closed(Vec::new())
    }

    /// `simplices` must already be face-closed.
    pub(crate) fn from_closed(mut simplices: Vec<Simplex>) -> Self {
        simplices.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        simplices.dedup();
        let index = simplices
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let vertices = simplices
            .iter()
            .take_while(|s| s.len() == 1)
            .map(|s| s[0])
            .collect();
        AbstractComplex {
            simplices,
            index,
            vertices,
        }
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Sorted vertex ids.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Largest simplex dimension, `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        self.simplices.last().map(Simplex::dim)
    }

    pub fn index_of(&self, vertices: &[usize]) -> Option<usize> {
        let mut v = vertices.to_vec();
        v.sort_unstable();
        self.index.get(&Simplex(v.into_boxed_slice())).copied()
    }

    pub fn contains(&self, vertices: &[usize]) -> bool {
        self.index_of(vertices).is_some()
    }

    /// Indices of the codimension-one faces of simplex `i`.
    pub fn boundary_indices(&self, i: usize) -> Vec<usize> {
        self.simplices[i]
            .boundary()
            .map(|f| self.index[&f])
            .collect()
    }

    /// Number of simplices in each dimension.
    pub fn f_vector(&self) -> Vec<usize> {
        let mut counts = vec![0; self.dim().map_or(0, |d| d + 1)];
        for s in &self.simplices {
            counts[s.dim()] += 1;
        }
        counts
    }

    /// Alternating count of simplices by dimension. Zero for the empty complex.
    pub fn euler_characteristic(&self) -> i64 {
        self.simplices.iter().map(Simplex::sign).sum()
    }

    /// Largest number of simplices containing a single vertex, the vertex
    /// itself included. Zero for the empty complex.
    pub fn max_vertex_cofaces(&self) -> usize {
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for s in &self.simplices {
            for &v in s.iter() {
                *counts.entry(v).or_default() += 1;
            }
        }
        counts.into_values().max().unwrap_or(0)
    }

    /// The simplices satisfying `keep`. The predicate must select a
    /// face-closed set; this is checked in debug builds.
    pub fn subcomplex(&self, mut keep: impl FnMut(usize, &Simplex) -> bool) -> AbstractComplex {
        let kept: Vec<Simplex> = self
            .simplices
            .iter()
            .enumerate()
            .filter(|&(i, s)| keep(i, s))
            .map(|(_, s)| s.clone())
            .collect();
        let sub = Self::from_closed(kept);
        debug_assert!(sub.is_face_closed());
        sub
    }

    /// True when every simplex's codimension-one faces are present.
    pub fn is_face_closed(&self) -> bool {
        self.simplices
            .iter()
            .all(|s| s.boundary().all(|f| self.index.contains_key(&f)))
    }

    /// True when every simplex of `self` is also in `other`.
    pub fn is_subcomplex_of(&self, other: &AbstractComplex) -> bool {
        self.simplices.iter().all(|s| other.index.contains_key(s))
    }

    /// Maximal simplices (those that are not a proper face of another).
    pub fn maximal_simplices(&self) -> Vec<Simplex> {
        let mut is_face = vec![false; self.simplices.len()];
        for i in 0..self.simplices.len() {
            for j in self.boundary_indices(i) {
                is_face[j] = true;
            }
        }
        self.simplices
            .iter()
            .zip(is_face)
            .filter(|(_, f)| !f)
            .map(|(s, _)| s.clone())
            .collect()
    }

    /// Renames vertex ids through `map`, which must be injective on the vertex set.
    pub fn relabel(&self, map: impl Fn(usize) -> usize) -> Result<AbstractComplex> {
        let relabeled: Vec<Vec<usize>> = self
            .maximal_simplices()
            .iter()
            .map(|s| s.iter().map(|&v| map(v)).collect())
            .collect();
        AbstractComplex::new(relabeled)
    }
}

/// Vertex coordinates in `R^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    dim: usize,
    ids: Vec<usize>,
    coords: Vec<f64>,
}

impl Embedding {
    /// Builds an embedding from `(vertex id, coordinates)` pairs.
    pub fn new<I>(dim: usize, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Vec<f64>)>,
    {
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut points: Vec<(usize, Vec<f64>)> = points.into_iter().collect();
        points.sort_by_key(|(id, _)| *id);
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::parse(
                "embedding",
                "a vertex was given more than one coordinate vector",
            ));
        }
        let mut ids = Vec::with_capacity(points.len());
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (id, p) in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite);
            }
            ids.push(id);
            coords.extend(p);
        }
        Ok(Embedding { dim, ids, coords })
    }

    /// Rows assigned to vertex ids `0..rows.len()`.
    pub fn from_rows(dim: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(dim, rows.into_iter().enumerate())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sorted vertex ids with coordinates.
    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn point(&self, id: usize) -> Option<&[f64]> {
        self.row_of(id).map(|r| self.row(r))
    }

    pub(crate) fn row_of(&self, id: usize) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub(crate) fn row(&self, r: usize) -> &[f64] {
        &self.coords[r * self.dim..(r + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> + '_ {
        self.ids
            .iter()
            .enumerate()
            .map(|(r, &id)| (id, self.row(r)))
    }

    /// Errors unless every vertex of `complex` has coordinates.
    pub fn check_covers(&self, complex: &AbstractComplex) -> Result<()> {
        match complex
            .vertices()
            .iter()
            .find(|&&v| self.row_of(v).is_none())
        {
            Some(&v) => Err(Error::MissingVertex(v)),
            None => Ok(()),
        }
    }

    /// Sum over vertices of the Euclidean distance between the two images.
    pub fn displacement(&self, other: &Embedding) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.ids != other.ids {
            return Err(Error::VertexSetMismatch);
        }
        Ok(self
            .coords
            .chunks_exact(self.dim)
            .zip(other.coords.chunks_exact(self.dim))
            .map(|(a, b)| euclidean(a, b))
            .sum())
    }

    /// Displacement restricted to the given vertex ids.
    pub fn displacement_on(&self, other: &Embedding, vertices: &[usize]) -> Result<f64> {
        vertices
            .iter()
            .map(|&v| {
                let a = self.point(v).ok_or(Error::MissingVertex(v))?;
                let b = other.point(v).ok_or(Error::MissingVertex(v))?;
                if a.len() != b.len() {
                    return Err(Error::DimensionMismatch {
                        expected: a.len(),
                        found: b.len(),
                    });
                }
                Ok(euclidean(a, b))
            })
            .sum()
    }

    /// Largest Euclidean norm of any vertex image.
    pub fn max_norm(&self) -> f64 {
        self.coords
            .chunks_exact(self.dim)
            .map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Applies `f` to every coordinate vector.
    pub fn map_points(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Embedding> {
        let points: Vec<_> = self.iter().map(|(id, p)| (id, f(p))).collect();
        let dim = points.first().map_or(self.dim, |(_, p)| p.len());
        Embedding::new(dim, points)
    }

    /// Ids of simplices whose embedded vertices are affinely dependent.
    pub fn degenerate_simplices(&self, complex: &AbstractComplex) -> Result<Vec<Simplex>> {
        self.check_covers(complex)?;
        Ok(complex
            .simplices()
            .iter()
            .filter(|s| s.len() > 1)
            .filter(|s| {
                let base = self.point(s[0]).unwrap();
                let rows: Vec<Vec<f64>> = s[1..]
                    .iter()
                    .map(|&v| {
                        let p = self.point(v).unwrap();
                        p.iter().zip(base).map(|(a, b)| a - b).collect()
                    })
                    .collect();
                rank(rows) < s.len() - 1
            })
            .cloned()
            .collect())
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Row rank by Gaussian elimination with partial pivoting.
fn rank(mut rows: Vec<Vec<f64>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let scale = rows
        .iter()
        .flatten()
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1.0);
    let tol = 1e-10 * scale;
    let mut r = 0;
    for c in 0..cols {
        let Some(p) =
            (r..rows.len()).max_by(|&i, &j| rows[i][c].abs().total_cmp(&rows[j][c].abs()))
        else {
            break;
        };
        if rows[p][c].abs() <= tol {
            continue;
        }
        rows.swap(r, p);
        let (top, rest) = rows.split_at_mut(r + 1);
        let pivot = &top[r];
        for row in rest {
            let f = row[c] / pivot[c];
            for (x, y) in row[c..cols].iter_mut().zip(&pivot[c..cols]) {
                *x -= f * y;
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// An abstract complex together with coordinates for each of its vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricComplex {
    complex: AbstractComplex,
    embedding: Embedding,
}

impl GeometricComplex {
    pub fn new(complex: AbstractComplex, embedding: Embedding) -> Result<Self> {
        embedding.check_covers(&complex)?;
        Ok(GeometricComplex { complex, embedding })
    }

    pub fn complex(&self) -> &AbstractComplex {
        &self.complex
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn ambient_dim(&self) -> usize {
        self.embedding.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solid_triangle() -> AbstractComplex {
        AbstractComplex::new([vec![0, 1, 2]]).unwrap()
    }

    #[test]
    fn closes_a_triangle() {
        let k = solid_triangle();
        let got: Vec<Vec<usize>> = k.simplices().iter().map(|s| s.to_vec()).collect();
        assert_eq!(
            got,
            vec![
                vec![0],
                vec![1],
                vec![2],
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 1, 2]
            ]
        );
    }

    #[test]
    fn single_vertex_and_hollow_triangle() {
        let v = AbstractComplex::new([vec![0]]).unwrap();
        assert_eq!(v.len(), 1);
        let hollow = AbstractComplex::new([vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert_eq!(hollow.f_vector(), vec![3, 3]);
        assert!(!hollow.contains(&[0, 1, 2]));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            AbstractComplex::new(Vec::<Vec<usize>>::new()),
            Err(Error::EmptyComplex)
        ));
        assert!(matches!(
            AbstractComplex::new([Vec::<usize>::new()]),
            Err(Error::EmptySimplex)
        ));
        assert!(matches!(
            AbstractComplex::new([vec![1, 1]]),
            Err(Error::RepeatedVertex(_))
        ));
        assert_eq!(
            Error::EmptyComplex.to_string(),
            "empty complex not permitted"
        );
    }

    #[test]
    fn unsorted_input_is_canonicalised() {
        let a = AbstractComplex::new([vec![2, 0, 1], vec![1, 0]]).unwrap();
        assert_eq!(a, solid_triangle());
    }

    #[test]
    fn euler_characteristics() {
        assert_eq!(solid_triangle().euler_characteristic(), 1);
        let hollow = AbstractComplex::new([vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert_eq!(hollow.euler_characteristic(), 0);
        let sphere =
            AbstractComplex::new([vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]])
                .unwrap();
        assert_eq!(sphere.f_vector(), vec![4, 6, 4]);
        assert_eq!(sphere.euler_characteristic(), 2);
        assert_eq!(AbstractComplex::empty().euler_characteristic(), 0);
    }

    #[test]
    fn coface_counts() {
        assert_eq!(
            AbstractComplex::new([vec![0]])
                .unwrap()
                .max_vertex_cofaces(),
            1
        );
        assert_eq!(solid_triangle().max_vertex_cofaces(), 4);
        let path = AbstractComplex::new([vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(path.max_vertex_cofaces(), 3);
        assert_eq!(AbstractComplex::empty().max_vertex_cofaces(), 0);
    }

    #[test]
    fn displacement_examples() {
        let f = Embedding::from_rows(2, vec![vec![0.0, 0.0]]).unwrap();
        assert_eq!(f.displacement(&f).unwrap(), 0.0);
        let g = Embedding::from_rows(2, vec![vec![0.5, 0.0]]).unwrap();
        assert_eq!(f.displacement(&g).unwrap(), 0.5);
        let f2 = Embedding::from_rows(2, vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let g2 = Embedding::from_rows(2, vec![vec![3.0, 4.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(f2.displacement(&g2).unwrap(), 5.0);
    }

    #[test]
    fn displacement_mismatches() {
        let f = Embedding::from_rows(2, vec![vec![0.0, 0.0]]).unwrap();
        let g3 = Embedding::from_rows(3, vec![vec![0.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(
            f.displacement(&g3),
            Err(Error::DimensionMismatch { .. })
        ));
        let other = Embedding::new(2, [(7, vec![0.0, 0.0])]).unwrap();
        assert!(matches!(
            f.displacement(&other),
            Err(Error::VertexSetMismatch)
        ));
    }

    #[test]
    fn geometric_complex_requires_coverage() {
        let f = Embedding::from_rows(2, vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            GeometricComplex::new(solid_triangle(), f),
            Err(Error::MissingVertex(2))
        ));
    }

    #[test]
    fn boundary_faces() {
        let k = solid_triangle();
        let top = k.index_of(&[0, 1, 2]).unwrap();
        let mut b = k.boundary_indices(top);
        b.sort();
        assert_eq!(
            b,
            vec![
                k.index_of(&[0, 1]).unwrap(),
                k.index_of(&[0, 2]).unwrap(),
                k.index_of(&[1, 2]).unwrap()
            ]
        );
        assert!(k.boundary_indices(0).is_empty());
    }

    #[test]
    fn degenerate_detection() {
        let k = solid_triangle();
        let flat =
            Embedding::from_rows(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let bad = flat.degenerate_simplices(&k).unwrap();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].to_vec(), vec![0, 1, 2]);
        let ok =
            Embedding::from_rows(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(ok.degenerate_simplices(&k).unwrap().is_empty());
    }

    #[test]
    fn face_test() {
        let a = Simplex::new(vec![0, 2]).unwrap();
        let b = Simplex::new(vec![0, 1, 2]).unwrap();
        assert!(a.is_face_of(&b));
        assert!(!b.is_face_of(&a));
        assert!(!Simplex::new(vec![3]).unwrap().is_face_of(&b));
    }
}
