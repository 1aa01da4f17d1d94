pub fn l2_norm(g: &[f64]) -> f64 {
    g.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Rescales `grads` in place so that its L2 norm does not exceed
/// `max_norm`. Returns the norm before clipping.
pub fn clip_grad_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = l2_norm(grads);
    if norm > max_norm {
        let scale = max_norm / norm;
        grads.iter_mut().for_each(|g| *g *= scale);
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clips_long_vectors() {
        let mut g = vec![0.0, 2.0 * 0.6, 2.0 * 0.8];
        assert_eq!(clip_grad_norm(&mut g, 1.0), 2.0);
        assert!((l2_norm(&g) - 1.0).abs() < 1e-15);
        assert!((g[1] - 0.6).abs() < 1e-15 && (g[2] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn leaves_short_vectors() {
        let mut g = vec![0.3, 0.4];
        clip_grad_norm(&mut g, 1.0);
        assert_eq!(g, vec![0.3, 0.4]);
    }
}
