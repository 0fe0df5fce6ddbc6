import type { IterationDoc, TokenUsage, TraceResponse, TraceRound } from './types.js';

// Renders the actor/critic dialogue: one card per iteration with the plan
// summary, a per-step tool/args table, the critique verdict, and token
// counts. Issues carrying a step_index highlight the matching table row.

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function tokens(usage: TokenUsage | null): string {
  if (!usage) return 'n/a';
  return `${usage.prompt_tokens + usage.completion_tokens} tokens`;
}

function renderIteration(doc: Document, iteration: IterationDoc): HTMLElement {
  const card = el(doc, 'article', 'iteration-card');
  card.dataset.revision = String(iteration.revision);

  const header = el(doc, 'header', 'iteration-header');
  header.appendChild(el(doc, 'span', 'revision', `revision ${iteration.revision}`));
  const badge = iteration.critique
    ? el(doc, 'span', `badge ${iteration.critique.decision}`, iteration.critique.decision)
    : el(doc, 'span', 'badge unreviewed', 'unreviewed');
  header.appendChild(badge);
  header.appendChild(el(doc, 'span', 'digest', iteration.trajectory_digest.slice(0, 12)));
  card.appendChild(header);

  card.appendChild(el(doc, 'p', 'summary', iteration.trajectory.trajectory_summary));

  const table = el(doc, 'table', 'steps');
  const head = el(doc, 'tr');
  for (const title of ['#', 'tool', 'arguments', 'objective']) {
    head.appendChild(el(doc, 'th', undefined, title));
  }
  table.appendChild(head);

  const highlighted = new Set<number>();
  for (const issue of iteration.critique?.blocking_issues ?? []) {
    if (issue.step_index !== undefined && issue.step_index !== null) {
      highlighted.add(issue.step_index);
    }
  }
  iteration.trajectory.tool_plan.forEach((step, index) => {
    const row = el(doc, 'tr', highlighted.has(index) ? 'step-row highlighted' : 'step-row');
    row.dataset.stepIndex = String(index);
    row.appendChild(el(doc, 'td', undefined, String(index)));
    row.appendChild(el(doc, 'td', 'tool', step.tool_name));
    row.appendChild(el(doc, 'td', 'args', JSON.stringify(step.arguments)));
    row.appendChild(el(doc, 'td', undefined, step.objective));
    table.appendChild(row);
  });
  card.appendChild(table);

  if (iteration.critique && iteration.critique.blocking_issues.length > 0) {
    const list = el(doc, 'ul', 'issues');
    for (const issue of iteration.critique.blocking_issues) {
      const item = el(doc, 'li', 'issue');
      item.appendChild(el(doc, 'span', 'dimension-tag', issue.dimension));
      const where =
        issue.step_index !== undefined && issue.step_index !== null
          ? ` (step ${issue.step_index}) `
          : ' ';
      item.appendChild(doc.createTextNode(where + issue.description));
      if (issue.correction_suggestion) {
        item.appendChild(el(doc, 'div', 'suggestion', `suggestion: ${issue.correction_suggestion}`));
      }
      list.appendChild(item);
    }
    card.appendChild(list);
  }
  if (iteration.critique && iteration.critique.missing_information.length > 0) {
    card.appendChild(
      el(doc, 'p', 'missing-info', `missing: ${iteration.critique.missing_information.join('; ')}`),
    );
  }

  const meter = el(doc, 'footer', 'tokens');
  meter.appendChild(el(doc, 'span', 'actor-tokens', `actor: ${tokens(iteration.actor_usage)}`));
  meter.appendChild(el(doc, 'span', 'critic-tokens', `critic: ${tokens(iteration.critic_usage)}`));
  card.appendChild(meter);
  return card;
}

function renderRound(doc: Document, round: TraceRound, index: number): HTMLElement {
  const section = el(doc, 'section', 'trace-round');
  section.dataset.round = String(index);
  const header = el(doc, 'header', 'round-header');
  header.appendChild(el(doc, 'h3', undefined, `round ${index + 1}`));
  const outcome = el(doc, 'span', `outcome ${round.outcome}`, round.outcome);
  header.appendChild(outcome);
  header.appendChild(
    el(
      doc,
      'span',
      'round-tokens',
      `total ${round.token_totals.prompt_tokens + round.token_totals.completion_tokens} tokens`,
    ),
  );
  section.appendChild(header);
  if (round.error) {
    section.appendChild(el(doc, 'p', 'round-error', round.error));
  }
  for (const iteration of round.iterations) {
    section.appendChild(renderIteration(doc, iteration));
  }
  if (round.outcome === 'best_effort' && round.final_validation.length > 0) {
    const note = el(
      doc,
      'p',
      'post-hoc',
      `post-hoc validation found ${round.final_validation.length} issue(s) in the unreviewed final plan`,
    );
    section.appendChild(note);
  }
  return section;
}

export function renderTrace(container: HTMLElement, trace: TraceResponse | null): void {
  const doc = container.ownerDocument;
  container.textContent = '';
  if (!trace || trace.rounds.length === 0) {
    container.appendChild(el(doc, 'p', 'empty', 'no refinement rounds yet'));
    return;
  }
  trace.rounds.forEach((round, index) => {
    container.appendChild(renderRound(doc, round, index));
  });
}
