use crate::error::{Error, Result};

/// Points with one cluster label each.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPointSet<L> {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<L>,
}

impl<L: Ord + Copy> LabeledPointSet<L> {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<L>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::Argument(format!("{} points but {} labels", points.len(), labels.len())));
        }
        Ok(LabeledPointSet { points, labels })
    }

    pub fn silhouette(&self) -> Result<f64> {
        silhouette_score(&self.points, &self.labels)
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Mean silhouette coefficient under the Euclidean metric.
///
/// Points alone in their cluster score 0, as do points whose intra- and
/// nearest inter-cluster mean distances are both 0.
pub fn silhouette_score<P: AsRef<[f64]>, L: Ord + Copy>(points: &[P], labels: &[L]) -> Result<f64> {
    let n = points.len();
    if n != labels.len() {
        return Err(Error::Argument(format!("{n} points but {} labels", labels.len())));
    }
    let mut distinct: Vec<L> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::Argument("silhouette needs at least two distinct labels".into()));
    }
    if let Some(p) = points.iter().find(|p| p.as_ref().len() != points[0].as_ref().len()) {
        return Err(Error::Argument(format!("point of dimension {} among dimension {}", p.as_ref().len(), points[0].as_ref().len())));
    }
    let k = distinct.len();
    let cluster: Vec<usize> = labels.iter().map(|l| distinct.binary_search(l).unwrap()).collect();
    let mut size = vec![0usize; k];
    cluster.iter().for_each(|&c| size[c] += 1);

    // sums[i * k + c]: total distance from point i to cluster c
    let mut sums = vec![0.0; n * k];
    for i in 0..n {
        let pi = points[i].as_ref();
        for j in i + 1..n {
            let d = euclidean(pi, points[j].as_ref());
            sums[i * k + cluster[j]] += d;
            sums[j * k + cluster[i]] += d;
        }
    }

    let mut total = 0.0;
    for i in 0..n {
        let own = cluster[i];
        if size[own] == 1 {
            continue;
        }
        let a = sums[i * k + own] / (size[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[i * k + c] / size[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}
