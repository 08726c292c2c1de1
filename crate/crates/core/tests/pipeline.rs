use hcrs_core::clustering::save_model;
use hcrs_core::color::{read_features, write_features};
use hcrs_core::hog::{fixture, window_descriptor};
use hcrs_core::ratings::{load_groups, load_ratings, save_groups, save_ratings, build_group_matrix};
use hcrs_core::*;

/// Images on disk through detection, color features, clustering and recommendation.
#[test]
fn images_to_recommendations() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixture::patch_fixture(11, 12, 12);
    let describe = |set: &[RgbImage]| -> Vec<_> { set.iter().map(|c| window_descriptor(c, (0, 0)).unwrap()).collect() };
    let model = train_svm(&describe(&fx.positives), &describe(&fx.negatives), &SvmParams::default()).unwrap();

    // channel swaps recolor the figure without changing its gradients
    let variants = [(0, false), (0, true), (1, false), (1, true)];
    let mut features = Vec::new();
    for (n, &(pos, swap)) in variants.iter().enumerate() {
        let scene = fixture::paste(&fx.flat, &fx.positives[pos], 96, 64);
        let scene = RgbImage::from_fn(256, 256, |x, y| {
            let [r, g, b] = scene.get(x, y);
            if swap { [b, g, r] } else { [r, g, b] }
        });
        let path = dir.path().join(format!("item{n}.ppm"));
        save_image(&scene, &path).unwrap();
        let img = load_image(&path).unwrap();
        let hits = detect(&img, &model, &DetectParams::default());
        let region = clothes_region(&hits, &img);
        assert!(region.iou(&fx.truth) >= 0.5, "item{n}: {region:?}");
        features.push(color_vector(&img, region, &format!("item{n}")).unwrap());
    }
    let feature_path = dir.path().join("features.csv");
    write_features(&feature_path, &features).unwrap();
    let features = read_features(&feature_path).unwrap();

    let points: Vec<&[f64]> = features.iter().map(|f| f.per.as_slice()).collect();
    let clusters = kmeans(&points, &KMeansParams::new(2, 0)).unwrap();
    save_model(&clusters, dir.path().join("centers.csv"), dir.path().join("centers.json")).unwrap();
    let ids: Vec<String> = features.iter().map(|f| f.item_id.clone()).collect();
    let groups = build_group_matrix(&membership(&points, &clusters).unwrap(), &ids).unwrap();
    save_groups(&groups, dir.path().join("groups.csv")).unwrap();
    let groups = load_groups(dir.path().join("groups.csv")).unwrap();
    // originals share a group, swapped copies share the other
    let same = |a: usize, b: usize| (0..2).all(|g| (groups.row(a)[g] - groups.row(b)[g]).abs() < 0.2);
    assert!(same(0, 2) && same(1, 3) && !same(0, 1));

    let mut ratings = RatingMatrix::new(RatingScale::default());
    for (item, user, r) in [("item0", "ann", 5.0), ("item1", "ann", 1.0), ("item0", "bo", 4.0), ("item2", "bo", 5.0), ("item1", "cy", 2.0), ("item3", "cy", 1.0), ("item3", "bo", 2.0)] {
        ratings.insert(item, user, r).unwrap();
    }
    save_ratings(&ratings, dir.path().join("ratings.csv")).unwrap();
    let ratings = load_ratings(dir.path().join("ratings.csv"), RatingScale::default()).unwrap();
    let m = extend(&ratings, &groups, 5.0).unwrap();
    let sims = similarity_matrix(&m, 0.5).unwrap();
    let ann = ratings.user_index("ann").unwrap();
    let recs = recommend(ann, 10, &sims, &NeighborOptions::new(10), &m).unwrap();
    let order: Vec<&str> = recs.iter().map(|p| p.item_id.as_str()).collect();
    assert_eq!(order, ["item2", "item3"]);
}
