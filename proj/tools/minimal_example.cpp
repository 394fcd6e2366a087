// Smallest direct use of the library: build a dataset, split it, train the
// full twin model for a few epochs, and print the test accuracy.

#include <cstdio>

#include "tgnn/tgnn.hpp"

int main() {
  using namespace tgnn;

  Dataset ds = make_synthetic_dataset(/*per_class=*/50, /*min_nodes=*/6, /*max_nodes=*/12, /*seed=*/1);
  apply_degree_features(ds, /*max_degree=*/16);
  SplitDataset split = split_dataset(ds, {2, 5, 1, 2}, /*seed=*/1);

  ModelDims dims;
  dims.input_dim = ds.graphs.front().feature_dim;
  dims.num_classes = ds.num_classes;
  dims.embed_dim = 32;
  TwinModel model = TwinModel::init(Variant::tgnn, dims, /*seed=*/1);

  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 32;
  cfg.seed = 1;
  Augmenter augmenter(AugmentConfig{}, dataset_mean_feature(ds));

  FitResult result = fit(model, ds, split, cfg, augmenter);
  EvalResult test = evaluate(model, ds, split.test);
  std::printf("best validation %.3f at epoch %d, test accuracy %.3f\n", result.best_val_acc,
              result.best_epoch, test.accuracy);
  return 0;
}
