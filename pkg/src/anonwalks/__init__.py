"""Whole-graph vector representations from anonymous walks.

A graph is embedded either by the probability distribution of its
anonymous-walk patterns (feature-based, exact or sampled) or by a vector
trained to predict walks from co-occurring walks (data-driven). Embeddings
feed kernel SVM classification with a repeated cross-validation harness.
"""

__version__ = "0.1.0"

from .features import (FeatureEmbedding, SamplingPlan, exact_embedding,
                       l1_distance, required_samples, sampled_embedding,
                       sampled_embeddings_multi)
from .graphs import (Graph, GraphCollection, generate_erdos_renyi,
                     load_collection, save_collection)
from .kernels import GramMatrix, KernelSpec, gram, kernel_value
from .svm import SvmModel, svm_predict, svm_train
from .training import (Corpus, ModelParams, TrainConfig, build_corpus,
                       infer_embedding, loss_and_gradients, train)
from .walks import (RandomWalkGraph, WalkVocabulary, anonymize,
                    build_random_walk_graph, enumerate_vocabulary,
                    sample_walk)
from .evaluate import EvalConfig, EvalReport, cross_validate, scalability_run
from .pipeline import datadriven_embeddings, feature_embeddings

__all__ = [
    "FeatureEmbedding", "SamplingPlan", "exact_embedding", "l1_distance",
    "required_samples", "sampled_embedding", "sampled_embeddings_multi",
    "Graph", "GraphCollection", "generate_erdos_renyi", "load_collection",
    "save_collection", "GramMatrix", "KernelSpec", "gram", "kernel_value",
    "SvmModel", "svm_predict", "svm_train", "Corpus", "ModelParams",
    "TrainConfig", "build_corpus", "infer_embedding", "loss_and_gradients",
    "train", "RandomWalkGraph", "WalkVocabulary", "anonymize",
    "build_random_walk_graph", "enumerate_vocabulary", "sample_walk",
    "EvalConfig", "EvalReport", "cross_validate", "scalability_run",
    "datadriven_embeddings", "feature_embeddings",
]
