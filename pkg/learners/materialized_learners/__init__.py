from .LazyLearning import LazyLearner
