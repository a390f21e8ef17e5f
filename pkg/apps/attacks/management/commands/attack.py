from itertools import zip_longest

from django.conf import settings

from apps.attacks.config import AttackConfig
from apps.classifiers.bow import load_model
from apps.commands import StabilityCommand
from apps.embeddings.store import load_embeddings
from apps.experiments.config import normalize_search
from apps.experiments.runner import SEARCH_FUNCTIONS
from apps.explainers.lime import ExplainerParams
from apps.texts.documents import tokenize


class Command(StabilityCommand):
    help = 'Search for a minimal perturbation that changes the explanation of a text'

    def add_arguments(self, parser):
        parser.add_argument('--model', help='Model file (defaults to STABILITY_MODEL_PATH)')
        parser.add_argument('--embeddings', help='Embedding file (defaults to STABILITY_EMBEDDINGS_PATH)')
        parser.add_argument('--text', required=True)
        parser.add_argument('--measure', help='rbo05, rbo07, rbo09, jaccard, jaccard_w, kendall, ...')
        parser.add_argument('--tau', type=float, help='Similarity threshold to reach')
        parser.add_argument('--search', default='greedy', help='greedy (gs) or genetic (ga)')
        parser.add_argument('--epsilon', type=float, help='Maximum share of words to replace')
        parser.add_argument('--delta', type=float, help='Minimum semantic similarity')
        parser.add_argument('--topk', type=int, help='Top features that must stay in the explanation')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--population', type=int)
        parser.add_argument('--generations', type=int)
        parser.add_argument('--neighbors', type=int, help='Embedding neighbours tried per word')
        parser.add_argument('--samples', type=int, help='Masked samples per explanation')
        parser.add_argument('--strict-semantic', action='store_true', default=None,
                            help='Reject candidates below the semantic threshold')

    def run(self, *args, **options):
        search = normalize_search(options['search'])
        cfg = AttackConfig.from_settings(
            explainer=ExplainerParams.from_settings(n=options['samples']),
            measure=options['measure'],
            tau=options['tau'],
            epsilon=options['epsilon'],
            delta=options['delta'],
            k=options['topk'],
            j=options['neighbors'],
            seed=options['seed'],
            ga_population=options['population'],
            ga_generations=options['generations'],
            strict_semantic=options['strict_semantic'],
        )
        model = load_model(options['model'] or settings.STABILITY_MODEL_PATH)
        store = load_embeddings(options['embeddings'] or settings.STABILITY_EMBEDDINGS_PATH)
        outcome = SEARCH_FUNCTIONS[search](model, store, tokenize(options['text']), cfg)
        self.print_outcome(outcome, cfg)

    def print_outcome(self, outcome, cfg):
        self.stdout.write(f'{"Original":<28}{"Perturbed":<28}')
        pairs = zip_longest(outcome.base_explanation.features, outcome.final_explanation.features)
        for original, perturbed in pairs:
            self.stdout.write(f'{self._feature(original):<28}{self._feature(perturbed):<28}')
        self.stdout.write('')
        self.stdout.write(f'Original:  {outcome.base_doc.text}')
        self.stdout.write(f'Perturbed: {outcome.surface()}')
        self.stdout.write(
            f'Similarity ({cfg.measure}): {outcome.final_similarity:.2%}   '
            f'perturbations: {outcome.perturbation_count} ({outcome.perturbation_rate:.0%})   '
            f'explain calls: {outcome.explain_calls}'
        )
        if outcome.semantic_similarity is not None:
            self.stdout.write(f'Semantic similarity: {outcome.semantic_similarity:.3f}'
                              f'{"" if outcome.semantic_ok else " (below delta)"}')

        if outcome.success:
            self.stdout.write(self.style.SUCCESS(f'✅ {outcome.search} attack reached tau {cfg.tau}'))
        else:
            self.stdout.write(self.style.WARNING(f'⚠️  {outcome.search} attack did not reach tau {cfg.tau}'))

    @staticmethod
    def _feature(feature):
        if feature is None:
            return ''
        word, weight = feature
        return f'{word} {weight:+.3f}'
