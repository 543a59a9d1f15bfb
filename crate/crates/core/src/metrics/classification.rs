use crate::error::{check_dim, Error, Result};

/// Percentage of positions where `predicted` equals `truth`.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    check_dim("prediction count", truth.len(), predicted.len())?;
    if truth.is_empty() {
        return Err(Error::Empty("accuracy of no predictions"));
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(100.0 * hits as f64 / truth.len() as f64)
}

/// `m[i][j]` counts positions with `a = i` and `b = j`.
pub fn confusion_matrix(a: &[usize], b: &[usize], classes: usize) -> Result<Vec<Vec<usize>>> {
    check_dim("label sequence length", a.len(), b.len())?;
    let mut m = vec![vec![0; classes]; classes];
    for (&i, &j) in a.iter().zip(b) {
        for label in [i, j] {
            if label >= classes {
                return Err(Error::LabelOutOfRange { label, classes });
            }
        }
        m[i][j] += 1;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[0, 1, 1, 2], &[0, 1, 2, 2]).unwrap(), 75.0);
        assert_eq!(accuracy(&[1, 1], &[1, 1]).unwrap(), 100.0);
        assert_eq!(accuracy(&[0, 0], &[1, 1]).unwrap(), 0.0);
        assert!(accuracy(&[], &[]).is_err());
        assert!(accuracy(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn confusion_examples() {
        let a = [0, 1, 2, 2];
        assert_eq!(
            confusion_matrix(&a, &a, 3).unwrap(),
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 2]]
        );
        let m = confusion_matrix(&[0, 0, 1], &[1, 1, 0], 2).unwrap();
        assert_eq!((m[0][0], m[1][1]), (0, 0));
        assert!(confusion_matrix(&[3], &[0], 3).is_err());
        assert!(confusion_matrix(&[0, 1], &[0], 3).is_err());
    }

    proptest! {
        #[test]
        fn confusion_matches_tally(pairs in prop::collection::vec((0usize..4, 0usize..4), 0..40)) {
            let a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let m = confusion_matrix(&a, &b, 4).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    let tally = pairs.iter().filter(|&&p| p == (i, j)).count();
                    prop_assert_eq!(m[i][j], tally);
                }
                prop_assert_eq!(m[i].iter().sum::<usize>(), a.iter().filter(|&&x| x == i).count());
            }
        }
    }
}
