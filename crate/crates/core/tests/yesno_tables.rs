use std::collections::BTreeMap;

use bioqa::bioasq::YesNo;
use bioqa::eval::eval_yesno;

fn confusion(yy: usize, yn: usize, ny: usize, nn: usize) -> (BTreeMap<String, YesNo>, BTreeMap<String, YesNo>) {
    let mut gold = BTreeMap::new();
    let mut pred = BTreeMap::new();
    let cells = [(YesNo::Yes, YesNo::Yes, yy), (YesNo::Yes, YesNo::No, yn), (YesNo::No, YesNo::Yes, ny), (YesNo::No, YesNo::No, nn)];
    let mut i = 0;
    for (g, p, n) in cells {
        for _ in 0..n {
            gold.insert(format!("q{i:03}"), g);
            pred.insert(format!("q{i:03}"), p);
            i += 1;
        }
    }
    (pred, gold)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-4
}

#[test]
fn all_yes_rows() {
    // (yes, no, accuracy, F1 yes, macro F1)
    let rows = [
        (23, 6, 0.7931, 0.8846, 0.4423),
        (17, 13, 0.5667, 0.7234, 0.3617),
        (18, 5, 0.7826, 0.8780, 0.4390),
        (17, 6, 0.7391, 0.8500, 0.4250),
        (19, 16, 0.5429, 0.7037, 0.3519),
    ];
    for (yes, no, acc, f1_yes, macro_f1) in rows {
        let (pred, gold) = confusion(yes, 0, no, 0);
        let m = eval_yesno(&pred, &gold).unwrap();
        assert!(close(m.accuracy, acc), "{yes}/{no}: {m:?}");
        assert!(close(m.f1_yes.unwrap(), f1_yes), "{yes}/{no}: {m:?}");
        assert_eq!(m.f1_no, None);
        assert!(close(m.macro_f1, macro_f1), "{yes}/{no}: {m:?}");
    }
}

#[test]
fn entailment_row() {
    let (pred, gold) = confusion(11, 6, 3, 3);
    let m = eval_yesno(&pred, &gold).unwrap();
    assert!(close(m.accuracy, 0.6087));
    assert!(close(m.f1_yes.unwrap(), 0.7097));
    assert!(close(m.f1_no.unwrap(), 0.4));
    assert!(close(m.macro_f1, 0.5548));
}

#[test]
fn missing_prediction_counts_against_gold_class() {
    let (mut pred, gold) = confusion(3, 0, 0, 1);
    pred.remove("q000");
    let m = eval_yesno(&pred, &gold).unwrap();
    assert_eq!(m.n_missing, 1);
    assert_eq!(m.accuracy, 0.75);
}
