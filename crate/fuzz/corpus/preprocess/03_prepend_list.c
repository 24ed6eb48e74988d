struct word_list { struct word_list *next; int word; };

#define PREPEND_LIST(nlist, elist) \
  do { nlist->next = elist; elist = nlist; } while (0)

void push(struct word_list *w, struct word_list **head) {
  struct word_list *list = *head;
  PREPEND_LIST(w, list);
  *head = list;
}

// expect PREPEND_LIST calling-convention-adapting ModifiedArguments
