//! Embedding, stacked LSTM and softmax heads, trained from scratch with
//! cross-entropy and RMSprop to map an `ID` key to its declaration codes.

mod config;
pub mod format;
mod lstm;
mod model;
mod optim;
mod tensor;
mod train;

pub use config::{ModelConfig, OutputMode, RMSPROP_EPS, RMSPROP_RHO};
pub use lstm::{lstm_step, sigmoid, step_backward, step_cached, LstmLayerParams, LstmState, Nonlinearity, StepCache};
pub use model::{embed, loss, softmax, Example, Model, Params, Prediction, SoftmaxLayer, LOG_CLAMP};
pub use optim::{rmsprop_update, RmsProp};
pub use tensor::Tensor;
pub use train::{
    examples, predict_declaration, split_pairs, train, training_recall, DeclPrediction, LossHistory, TrainOutcome,
    TrainedModel,
};
