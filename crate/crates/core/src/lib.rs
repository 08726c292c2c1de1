//! Hybrid clothes recommender: HOG clothes detection, HSV color features,
//! soft color clustering, and item-based collaborative filtering over an
//! extended user + color-group rating matrix.

pub mod cf;
pub mod clustering;
pub mod color;
pub mod eval;
pub mod hog;
pub mod imaging;
pub mod ratings;

pub use cf::{
    adjusted_cosine_sim, combined_sim, pearson_sim, predict, recommend, similarity_matrix, CfError, NeighborOptions, Prediction,
    SimilarityMatrix,
};
pub use clustering::{counter_similarity, kmeans, membership, ClusterError, ClusterModel, KMeansParams, MembershipMatrix};
pub use color::{clothes_region, color_vector, quantize_hsv, ColorCode, ColorError, ColorVector, COLOR_CODES};
pub use eval::{
    baseline_pearson, emit_report, evaluate, gen_synthetic, mae, split, sweep, Dataset, EvalError, EvalParams, EvalReport,
    SweepAxis, SweepGrid, SyntheticConfig,
};
pub use hog::{
    compute_gradients, detect, train_svm, window_descriptor, DetectParams, Detection, HogDescriptor, HogError, LinearSvmModel,
    SvmParams,
};
pub use imaging::{load_image, rgb_to_hsv, save_image, HsvPixel, ImageError, Region, RgbImage};
pub use ratings::{extend, ExtendedMatrix, GroupRatingMatrix, RatingError, RatingMatrix, RatingScale};
