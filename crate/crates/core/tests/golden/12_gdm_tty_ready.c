struct tty_port { int count; };
struct gdm { void *tty_dev; struct tty_port port; };
struct tty_dev { struct gdm *gdm[4]; };

#define GDM_TTY_READY(gdm) \
  (gdm && gdm->tty_dev && gdm->port.count)

int gdm_tty_open(struct tty_dev *tty_dev, int index) {
  struct gdm *gdm = tty_dev->gdm[index];
  if (!GDM_TTY_READY(gdm))
    return -1;
  return 0;
}

// expect GDM_TTY_READY definition-adapting -
