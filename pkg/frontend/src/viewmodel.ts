/** Client-side selection state and confirm gating for one screen.
 *
 * The view model mirrors the Screen document plus local optimistic
 * selections; it never holds or infers correctness. Radio-style screens
 * (one pick, or one pick per question) replace the sibling selection,
 * multi-select screens toggle up to the screen's maximum.
 */

import { ScreenDoc } from './types'

const RADIO_KINDS = new Set(['orientation_question', 'story_step'])
const GROUPED_KINDS = new Set(['consent'])

export interface SelectionChange {
  type: 'select' | 'deselect'
  optionId: string
}

interface BankQuestionRef {
  id: string
  text: string
}

export class ScreenViewModel {
  readonly screen: ScreenDoc
  private selections: string[]
  private environmentAnswers: Map<string, 'yes' | 'no'>

  constructor(screen: ScreenDoc) {
    this.screen = screen
    this.selections = [...screen.selected]
    this.environmentAnswers = new Map()
    if (screen.kind === 'environment_state') {
      for (const entry of screen.selected) {
        const colon = entry.lastIndexOf(':')
        if (colon > 0) {
          this.environmentAnswers.set(entry.slice(0, colon), entry.slice(colon + 1) as 'yes' | 'no')
        }
      }
    }
  }

  questions(): BankQuestionRef[] {
    const raw = this.screen.extra['questions']
    return Array.isArray(raw) ? (raw as BankQuestionRef[]) : []
  }

  environmentAnswer(questionId: string): 'yes' | 'no' | undefined {
    return this.environmentAnswers.get(questionId)
  }

  answerEnvironment(questionId: string, answer: 'yes' | 'no'): void {
    this.environmentAnswers.set(questionId, answer)
  }

  selectedIds(): string[] {
    return [...this.selections]
  }

  isSelected(optionId: string): boolean {
    return this.selections.includes(optionId)
  }

  /** Option ids grouped by question, for one-answer-per-question screens. */
  private groupOf(optionId: string): string {
    const colon = optionId.lastIndexOf(':')
    return colon === -1 ? optionId : optionId.slice(0, colon)
  }

  /**
   * Apply a tap on an option; returns the events the service must see,
   * in order. Tapping a selected option deselects it; tapping a new option
   * on a radio screen first deselects the sibling.
   */
  tap(optionId: string): SelectionChange[] {
    if (this.isSelected(optionId)) {
      this.selections = this.selections.filter((id) => id !== optionId)
      return [{ type: 'deselect', optionId }]
    }
    const changes: SelectionChange[] = []
    if (RADIO_KINDS.has(this.screen.kind) && this.selections.length > 0) {
      const previous = this.selections[0]
      this.selections = []
      changes.push({ type: 'deselect', optionId: previous })
    } else if (GROUPED_KINDS.has(this.screen.kind)) {
      const sibling = this.selections.find((id) => this.groupOf(id) === this.groupOf(optionId))
      if (sibling) {
        this.selections = this.selections.filter((id) => id !== sibling)
        // the engine's grouped answers replace implicitly; no deselect on the wire
      }
    } else if (this.selections.length >= this.screen.max_selections) {
      return [] // at the limit: the tap is refused, nothing is emitted
    }
    this.selections.push(optionId)
    changes.push({ type: 'select', optionId })
    return changes
  }

  /** The global confirm button state per the screen's min/max rule. */
  canConfirm(): boolean {
    const n = this.selections.length
    if (this.screen.kind === 'consent') {
      const groups = new Set(this.screen.options.map((o) => this.groupOf(o.id)))
      const answered = new Set(this.selections.map((id) => this.groupOf(id)))
      return answered.size === groups.size
    }
    if (this.screen.kind === 'environment_state') {
      return this.questions().every((q) => this.environmentAnswers.has(q.id))
    }
    return n >= this.screen.min_selections && n <= this.screen.max_selections
  }
}
