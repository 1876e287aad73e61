import type { CommitRecord } from './types';

export interface Selection {
  from: string;
  to: string;
}

/**
 * Commit timeline state. Commits arrive in lineage order from the API;
 * selecting any two of them always yields a (from, to) pair where
 * `from` precedes `to` in that order.
 */
export class TimelineViewState {
  commits: CommitRecord[] = [];
  picked: string | null = null;
  selection: Selection | null = null;
  error: string | null = null;
  loading = false;

  setCommits(commits: CommitRecord[]): void {
    this.commits = commits;
    this.picked = null;
    this.selection = null;
    this.error = null;
  }

  /** Click handler: first click arms, second click completes the pair. */
  pick(commitId: string): Selection | null {
    const index = this.commits.findIndex((c) => c.commit_id === commitId);
    if (index < 0) return null;
    if (this.picked === null || this.picked === commitId) {
      this.picked = commitId;
      return null;
    }
    const other = this.commits.findIndex((c) => c.commit_id === this.picked);
    const [a, b] = other < index ? [other, index] : [index, other];
    this.selection = {
      from: this.commits[a].commit_id,
      to: this.commits[b].commit_id,
    };
    this.picked = null;
    return this.selection;
  }
}

export function renderTimeline(state: TimelineViewState): string {
  if (state.error) {
    return `<div class="timeline error" role="alert">${state.error}` +
      `<button data-action="retry">Retry</button></div>`;
  }
  if (state.commits.length === 0) {
    return `<div class="timeline empty">No versions recorded yet.</div>`;
  }
  const nodes = state.commits
    .map((c) => {
      const classes = ['timeline-node'];
      if (state.picked === c.commit_id) classes.push('picked');
      if (state.selection && [state.selection.from, state.selection.to].includes(c.commit_id)) {
        classes.push('selected');
      }
      return (
        `<li class="${classes.join(' ')}" data-commit="${c.commit_id}" tabindex="0">` +
        `<span class="hash">${c.commit_id.slice(0, 8)}</span>` +
        `<span class="author">${c.author}</span>` +
        `<time>${c.timestamp}</time>` +
        `<span class="message">${c.message}</span></li>`
      );
    })
    .join('');
  return `<ol class="timeline">${nodes}</ol>`;
}
