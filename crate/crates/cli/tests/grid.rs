use std::cell::RefCell;

use hqnet_cli::grid::{enumerate_grid, read_results, run_grid, CellResult, GridCell, RESULTS_HEADER};
use hqnet_cli::{CliError, RunConfig};

/// Accuracies with deliberate ties, so ordering exercises the tie rule.
fn stub(cell: &GridCell) -> CellResult {
    CellResult {
        best_val_acc: ((cell.index * 37) % 11) as f64 / 10.0,
        best_val_loss: 1.0 / (cell.index + 1) as f64,
        epochs: cell.index % 7 + 1,
    }
}

/// Position of cell `i` in the ranking: the number of cells that must come
/// before it.
fn expected_rank(i: usize) -> usize {
    let acc = |k: usize| stub(&enumerate_grid()[k]).best_val_acc;
    (0..48).filter(|&j| acc(j) > acc(i) || (acc(j) == acc(i) && j < i)).count()
}

#[test]
fn ranking_matches_counting_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let ranked = run_grid(&RunConfig::default(), &dir.path().join("r.csv"), |c, _| Ok(stub(c))).unwrap();
    assert_eq!(ranked.len(), 48);
    for (pos, (cell, _)) in ranked.iter().enumerate() {
        assert_eq!(pos, expected_rank(cell.index), "cell {}", cell.index);
    }
}

#[test]
fn cells_see_their_hyperparameters() {
    let dir = tempfile::tempdir().unwrap();
    let base = RunConfig {
        n_qubits: 4,
        ..RunConfig::default()
    };
    run_grid(&base, &dir.path().join("r.csv"), |cell, cfg| {
        assert_eq!(
            (cfg.lr, cfg.batch_size, cfg.dropout, cfg.label_smoothing, cfg.depth),
            (cell.lr, cell.batch_size, cell.dropout, cell.label_smoothing, cell.depth)
        );
        assert_eq!(cfg.n_qubits, 4);
        Ok(stub(cell))
    })
    .unwrap();
}

#[test]
fn interrupted_search_resumes_where_it_stopped() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let base = RunConfig::default();

    let calls = RefCell::new(Vec::new());
    let interrupted = run_grid(&base, &path, |cell, _| {
        if cell.index == 17 {
            return Err(CliError::Other("interrupted".into()));
        }
        calls.borrow_mut().push(cell.index);
        Ok(stub(cell))
    });
    assert!(interrupted.is_err());
    assert_eq!(*calls.borrow(), (0..17).collect::<Vec<_>>());
    assert_eq!(read_results(&path).unwrap().len(), 17);

    calls.borrow_mut().clear();
    let ranked = run_grid(&base, &path, |cell, _| {
        calls.borrow_mut().push(cell.index);
        Ok(stub(cell))
    })
    .unwrap();
    assert_eq!(*calls.borrow(), (17..48).collect::<Vec<_>>());
    assert_eq!(ranked.len(), 48);

    let fresh = dir.path().join("fresh.csv");
    run_grid(&base, &fresh, |c, _| Ok(stub(c))).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&fresh).unwrap());
}

#[test]
fn foreign_results_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    std::fs::write(&path, format!("{RESULTS_HEADER}\n3,0.1,32,0,0,3,0.5,0.5,2\n")).unwrap();
    assert!(matches!(read_results(&path), Err(CliError::Data(_))));
    std::fs::write(&path, "something,else\n").unwrap();
    assert!(read_results(&path).is_err());
}
