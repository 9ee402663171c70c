use std::fs::File;
use std::io::{BufReader, Write};

use multinv::formats::{self, Row};
use multinv_core::fractal::{rational, PointSet1D, PointSet2D};
use multinv_core::tree::Tree;
use multinv_core::{IntSet, Radix};

#[test]
fn intset_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.txt");
    let a = IntSet::restricted_digits(Radix::new(3).unwrap(), &[0, 2], 3u64.pow(7));
    formats::write_intset(&mut File::create(&path).unwrap(), &a).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# bound=2187\n0\n2\n6\n8\n"));
    let back = formats::read_intset(BufReader::new(File::open(&path).unwrap())).unwrap();
    assert_eq!(back, a);
}

#[test]
fn point_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = PointSet1D::new(vec![rational(1, 3), rational(0, 1), rational(5, 7)]).unwrap();
    let path = dir.path().join("p1.csv");
    formats::write_points_1d(File::create(&path).unwrap(), &p1).unwrap();
    assert_eq!(formats::read_points_1d(File::open(&path).unwrap()).unwrap(), p1);

    let p2 = PointSet2D::new(vec![(rational(1, 2), rational(2, 9)), (rational(0, 1), rational(8, 9))]).unwrap();
    let path = dir.path().join("p2.csv");
    formats::write_points_2d(File::create(&path).unwrap(), &p2).unwrap();
    assert_eq!(formats::read_points_2d(File::open(&path).unwrap()).unwrap(), p2);

    let mut f = File::create(&path).unwrap();
    writeln!(f, "1/2, 1/0").unwrap();
    assert!(formats::read_points_2d(File::open(&path).unwrap()).is_err());
}

#[test]
fn tree_dump_round_trip() {
    let t = Tree::from_parent_lists(vec![vec![0], vec![0, 0, 0], vec![0, 1, 1, 2]]).unwrap();
    let mut buf = Vec::new();
    formats::write_tree(&mut buf, &t, |_| "x".to_string()).unwrap();
    let back = formats::read_tree(buf.as_slice()).unwrap();
    assert_eq!(back.node_count(), 8);
    assert_eq!(back.height(), 2);
    for q in t.nodes() {
        assert_eq!(back.child_count(q), t.child_count(q));
        assert_eq!(back.payload(q), "x");
    }
}

#[test]
fn experiment_rows_round_trip() {
    let rows = vec![
        Row {
            experiment: "dims".into(),
            fixture: "golden".into(),
            param1: "r=2".into(),
            param2: "".into(),
            level: 40,
            count: "267914296".into(),
            value: "0.69".into(),
        },
        Row {
            experiment: "dims".into(),
            fixture: "a, b".into(),
            param1: "".into(),
            param2: "".into(),
            level: 1,
            count: "2".into(),
            value: "1".into(),
        },
    ];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    formats::write_rows(File::create(&path).unwrap(), &rows).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("experiment,fixture,param1,param2,level,count,value\n"));
    assert_eq!(formats::read_rows(File::open(&path).unwrap()).unwrap(), rows);
}
