from django.conf import settings

from apps.classifiers.bow import load_model, predict
from apps.commands import StabilityCommand
from apps.explainers.lime import ExplainerParams, explain
from apps.texts.documents import tokenize


class Command(StabilityCommand):
    help = 'Explain a classifier prediction with a local surrogate model'

    def add_arguments(self, parser):
        parser.add_argument('--model', help='Model file (defaults to STABILITY_MODEL_PATH)')
        parser.add_argument('--text', required=True)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--samples', type=int, help='Masked samples drawn')
        parser.add_argument('--features', type=int, help='Features kept in the explanation')

    def run(self, *args, **options):
        model = load_model(options['model'] or settings.STABILITY_MODEL_PATH)
        params = ExplainerParams.from_settings(n=options['samples'], m=options['features'])
        doc = tokenize(options['text'])
        explanation = explain(model, doc, params, options['seed'])
        distribution = predict(model, doc)

        self.stdout.write(
            f'Prediction: {model.classes[distribution.label]} '
            f'({distribution[distribution.label]:.3f}), explaining class '
            f'{model.classes[explanation.target_class]} with seed {explanation.seed}'
        )
        width = max(len(word) for word in explanation.words)
        self.stdout.write(f'{"rank":>4}  {"word":<{width}}  weight')
        for rank, (word, weight) in enumerate(explanation.features, start=1):
            self.stdout.write(f'{rank:>4}  {word:<{width}}  {weight:+.4f}')
